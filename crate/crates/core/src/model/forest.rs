//! Bagged ensemble of trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::impurity::Criterion;
use super::tree::{Builder, Node, Sample, Tree, TreeParams};
use crate::error::{Error, Result};

/// How many features a node examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    /// `ceil(sqrt(kept))`
    Sqrt,
    /// `max(1, floor(log2(kept)))`
    Log2,
    All,
}

impl FeatureSubset {
    pub fn size(self, kept: usize) -> usize {
        let k = kept as f64;
        let m = match self {
            FeatureSubset::Sqrt => k.sqrt().ceil() as usize,
            FeatureSubset::Log2 => k.log2().floor() as usize,
            FeatureSubset::All => kept,
        };
        m.clamp(1, kept.max(1))
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSubset::Sqrt => "sqrt",
            FeatureSubset::Log2 => "log2",
            FeatureSubset::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_trees: usize,
    pub criterion: Criterion,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub feature_subset: FeatureSubset,
    /// Train each tree on a bootstrap resample; off, every tree sees all rows.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 200,
            criterion: Criterion::Gini,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            feature_subset: FeatureSubset::Sqrt,
            bootstrap: true,
            seed: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("a forest needs at least one tree"));
        }
        if self.min_samples_split < 2 || self.min_samples_leaf < 1 {
            return Err(Error::invalid("min_samples_split must be ≥ 2 and min_samples_leaf ≥ 1"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::invalid("max_depth must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub samples: usize,
    pub positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub feature_names: Vec<String>,
    /// Features the trees were allowed to split on.
    pub kept_mask: Vec<bool>,
    pub hyperparams: Hyperparams,
    pub info: TrainingInfo,
}

pub(crate) fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

/// Trains on every column with generated feature names.
pub fn train_forest(x: &[Vec<f64>], y: &[u8], hp: &Hyperparams) -> Result<Forest> {
    let width = x.first().map_or(0, Vec::len);
    train_forest_with(x, y, &default_names(width), &vec![true; width], hp)
}

/// Trains using only the features set in `kept_mask`; rows keep the full
/// layout.
pub fn train_forest_with(
    x: &[Vec<f64>],
    y: &[u8],
    feature_names: &[String],
    kept_mask: &[bool],
    hp: &Hyperparams,
) -> Result<Forest> {
    hp.validate()?;
    let width = feature_names.len();
    if x.len() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if kept_mask.len() != width {
        return Err(Error::LayoutMismatch {
            expected: width,
            actual: kept_mask.len(),
        });
    }
    if let Some(row) = x.iter().find(|r| r.len() != width) {
        return Err(Error::LayoutMismatch {
            expected: width,
            actual: row.len(),
        });
    }
    if x.len() < hp.min_samples_split {
        return Err(Error::invalid("fewer rows than min_samples_split"));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    let positives = y.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::invalid("training labels contain a single class"));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite feature value"));
    }
    let candidates: Vec<usize> = (0..width).filter(|&f| kept_mask[f]).collect();
    if candidates.is_empty() {
        return Err(Error::invalid("no features kept"));
    }
    let columns: Vec<Vec<f64>> = (0..width)
        .map(|f| if kept_mask[f] { x.iter().map(|r| r[f]).collect() } else { Vec::new() })
        .collect();
    let params = TreeParams {
        criterion: hp.criterion,
        max_depth: hp.max_depth,
        min_samples_split: hp.min_samples_split,
        min_samples_leaf: hp.min_samples_leaf,
        features_per_node: hp.feature_subset.size(candidates.len()),
    };
    let n = x.len();
    let trees = (0..hp.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(hp.seed, t);
            let mut samples = if hp.bootstrap {
                let mut counts = vec![0u32; n];
                for _ in 0..n {
                    counts[rng.gen_range(0..n)] += 1;
                }
                counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(row, &weight)| Sample { row: row as u32, weight })
                    .collect()
            } else {
                (0..n).map(|row| Sample { row: row as u32, weight: 1 }).collect::<Vec<_>>()
            };
            Builder::new(&columns, y, &candidates, params, &mut rng).build(&mut samples)
        })
        .collect();
    Ok(Forest {
        trees,
        feature_names: feature_names.to_vec(),
        kept_mask: kept_mask.to_vec(),
        hyperparams: *hp,
        info: TrainingInfo { samples: n, positives },
    })
}

impl Forest {
    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    /// Mean positive-class probability over the trees and the ≥ 0.5 label.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, u8)> {
        if x.len() != self.width() {
            return Err(Error::LayoutMismatch {
                expected: self.width(),
                actual: x.len(),
            });
        }
        // Summing in sorted order makes the result independent of tree order.
        let mut probs: Vec<f64> = self.trees.iter().map(|t| t.probability(x)).collect();
        probs.sort_unstable_by(f64::total_cmp);
        let p = (probs.iter().sum::<f64>() / probs.len() as f64).clamp(0.0, 1.0);
        Ok((p, u8::from(p >= 0.5)))
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<(f64, u8)>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn labels(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        Ok(self.predict_all(rows)?.into_iter().map(|(_, l)| l).collect())
    }
}

/// Per-feature share of the forest's total weighted impurity decrease.
/// All zeros when no split decreased impurity.
pub fn feature_importance(forest: &Forest) -> Vec<f64> {
    let mut scores = vec![0.0; forest.width()];
    for tree in &forest.trees {
        for node in &tree.nodes {
            if let Node::Split { feature, decrease, .. } = *node {
                scores[feature] += decrease;
            }
        }
    }
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        for s in &mut scores {
            *s /= total;
        }
    }
    scores
}

/// Feature indices ordered by importance, highest first; ties by index.
pub fn importance_ranking(importance: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..importance.len()).collect();
    idx.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    idx
}
