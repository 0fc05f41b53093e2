//! Seeded synthetic feature datasets with planted signal.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::{feature_specs, FeatureKind, FeatureMatrix};
use crate::lexicon::Pos;

/// Share of outdated pairs in the mined corpora the generator imitates.
pub const POSITIVE_RATE: f64 = 0.168;

/// The feature that carries the most label information.
pub const PLANTED_FEATURE: &str = "common_token_pair_distance";

fn index(name: &str) -> usize {
    feature_specs()
        .iter()
        .position(|s| s.name == name)
        .unwrap_or_else(|| panic!("unknown feature {name}"))
}

fn small_count(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    // Geometric counts with the given mean.
    let p = 1.0 / (1.0 + mean);
    let mut k = 0.0;
    while rng.gen::<f64>() > p && k < 20.0 {
        k += 1.0;
    }
    k
}

fn distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.gen::<f64>().powi(3)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `n` rows in the full feature layout, `round(n * positive_rate)` of them
/// positive. Positives lose comment tokens from the code, drift further in
/// comment/code similarity, and change declarations more often; negatives
/// still show moderate similarity drift, which is what trips a single
/// similarity threshold.
pub fn feature_dataset(n: usize, positive_rate: f64, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs = feature_specs();
    let positives = (n as f64 * positive_rate).round() as usize;
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < positives)).collect();
    labels.shuffle(&mut rng);

    let decl = ["class_attributes_change", "method_name_change", "return_type_change", "parameter_change"]
        .map(index);
    let (d_smt, d_token, d_code) = (index("d_cmt_smt"), index("d_token_code"), index("d_cmt_code"));
    let common = index(PLANTED_FEATURE);
    let code_pos = index("code_pos_noun_distance");
    let comment_pos = index("comment_pos_noun");

    let rows = labels
        .iter()
        .map(|&y| {
            let pos = y == 1;
            let mut row = vec![0.0; specs.len()];
            for (j, s) in specs.iter().enumerate() {
                row[j] = match s.kind {
                    FeatureKind::Binary => f64::from(u8::from(rng.gen_bool(0.08))),
                    FeatureKind::Count => small_count(&mut rng, 0.4),
                    FeatureKind::Continuous => rng.gen(),
                };
            }
            for &j in &decl {
                row[j] = f64::from(u8::from(rng.gen_bool(if pos { 0.35 } else { 0.04 })));
            }
            let shift: f64 = if pos { rng.gen_range(0.04..0.45) } else { rng.gen_range(0.0..0.12) };
            row[d_code] = shift;
            row[d_smt] = (shift * rng.gen_range(0.6..1.4) + rng.gen_range(0.0..0.05)).min(1.0);
            row[d_token] = (shift * rng.gen_range(0.5..1.5) + rng.gen_range(0.0..0.05)).min(1.0);
            row[common] = if pos {
                if rng.gen_bool(0.9) {
                    1.0 + small_count(&mut rng, 0.8)
                } else {
                    0.0
                }
            } else if rng.gen_bool(0.06) {
                1.0
            } else if rng.gen_bool(0.02) {
                -1.0
            } else {
                0.0
            };
            let codes = distribution(&mut rng, Pos::ALL.len());
            row[code_pos..code_pos + Pos::ALL.len()].copy_from_slice(&codes.iter().map(|c| c * 0.3).collect::<Vec<_>>());
            let comments = distribution(&mut rng, Pos::ALL.len());
            row[comment_pos..comment_pos + Pos::ALL.len()].copy_from_slice(&comments);
            row
        })
        .collect();
    FeatureMatrix {
        names: specs.iter().map(|s| s.name.clone()).collect(),
        rows,
        labels,
    }
}
