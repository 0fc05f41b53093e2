use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::change::{label_pair, pair_tree, PairChange};
use crate::distiller::decl::DeclChange;
use crate::distiller::{diff, GrammarId, LineSpan};
use crate::embed::EmbeddingModel;
use crate::features::PairTokens;
use crate::linker::{CodeCommentPair, PairKind};
use crate::refactor::RefactoringFlags;

// Straight from the definition, with exact rational arithmetic.
fn gini_oracle(labels: &[u8]) -> (i64, i64) {
    let n = labels.len() as i64;
    if n == 0 {
        return (0, 1);
    }
    let c1 = labels.iter().filter(|&&l| l == 1).count() as i64;
    let c0 = n - c1;
    (n * n - c0 * c0 - c1 * c1, n * n)
}

fn close_to(x: f64, (num, den): (i64, i64)) -> bool {
    (x - num as f64 / den as f64).abs() <= 4.0 * f64::EPSILON
}

fn all_label_sets(max: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for n in 0..=max {
        for ones in 0..=n {
            let mut v = vec![0u8; n - ones];
            v.extend(std::iter::repeat(1).take(ones));
            out.push(v);
        }
    }
    out
}

#[test]
fn gini_matches_oracle_on_small_multisets() {
    for labels in all_label_sets(8) {
        assert!(close_to(gini(&labels), gini_oracle(&labels)), "{labels:?}");
    }
}

#[test]
fn gain_matches_oracle_on_small_multisets() {
    for parent in all_label_sets(8) {
        let n = parent.len();
        // Every left multiset the parent can contribute.
        let ones = parent.iter().filter(|&&l| l == 1).count();
        for lo in 0..=ones {
            for lz in 0..=(n - ones) {
                let mut left = vec![0u8; lz];
                left.extend(std::iter::repeat(1).take(lo));
                let mut right = vec![0u8; n - ones - lz];
                right.extend(std::iter::repeat(1).take(ones - lo));
                let (pn, pd) = gini_oracle(&parent);
                let (ln, ld) = gini_oracle(&left);
                let (rn, rd) = gini_oracle(&right);
                let nn = n.max(1) as f64;
                let expect = pn as f64 / pd as f64
                    - left.len() as f64 / nn * (ln as f64 / ld as f64)
                    - right.len() as f64 / nn * (rn as f64 / rd as f64);
                let got = gain(&parent, &left, &right);
                assert!((got - expect).abs() < 1e-12, "{parent:?} {left:?} {right:?}");
            }
        }
    }
}

fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let label = (i % 3 == 0) as u8;
        let signal = if label == 1 { rng.gen_range(0.6..1.0) } else { rng.gen_range(0.0..0.4) };
        x.push(vec![signal, rng.gen(), rng.gen(), rng.gen()]);
        y.push(label);
    }
    (x, y)
}

fn small_hp(trees: usize) -> Hyperparams {
    Hyperparams {
        n_trees: trees,
        seed: 7,
        ..Hyperparams::default()
    }
}

#[test]
fn separable_data_is_fit_exactly() {
    let (x, y) = separable(120, 1);
    let f = train_forest(&x, &y, &small_hp(25)).unwrap();
    assert_eq!(f.labels(&x).unwrap(), y);
    assert_eq!(evaluate(&f.labels(&x).unwrap(), &y).unwrap().accuracy(), 1.0);
}

#[test]
fn training_is_deterministic() {
    let (x, y) = separable(80, 2);
    let a = train_forest(&x, &y, &small_hp(10)).unwrap();
    let b = train_forest(&x, &y, &small_hp(10)).unwrap();
    assert_eq!(a, b);
    let c = train_forest(&x, &y, &Hyperparams { seed: 8, ..small_hp(10) }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn xor_is_not_depth_one_separable() {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for _ in 0..5 {
                x.push(vec![a as f64, b as f64]);
                y.push((a ^ b) as u8);
            }
        }
    }
    // Every stump, either orientation, misclassifies some point.
    for f in 0..2 {
        for flip in [false, true] {
            let pred: Vec<u8> = x.iter().map(|r| u8::from((r[f] > 0.5) != flip)).collect();
            assert!(pred != y);
        }
    }
    let hp = Hyperparams {
        max_depth: Some(1),
        ..small_hp(30)
    };
    let f = train_forest(&x, &y, &hp).unwrap();
    assert!(f.trees.iter().all(|t| t.depth() <= 1));
    let acc = evaluate(&f.labels(&x).unwrap(), &y).unwrap().accuracy();
    assert!(acc < 1.0, "accuracy {acc}");
}

#[test]
fn bad_training_input_is_rejected() {
    let (x, y) = separable(30, 3);
    assert!(train_forest(&x, &vec![1; 30], &small_hp(2)).is_err());
    assert!(train_forest(&x, &y[..29], &small_hp(2)).is_err());
    let mut ragged = x.clone();
    ragged[4].pop();
    assert!(matches!(train_forest(&ragged, &y, &small_hp(2)), Err(crate::Error::LayoutMismatch { .. })));
    let f = train_forest(&x, &y, &small_hp(2)).unwrap();
    assert!(matches!(f.predict(&[0.0; 3]), Err(crate::Error::LayoutMismatch { .. })));
}

fn hand_forest(leaves: &[f64]) -> Forest {
    Forest {
        trees: leaves
            .iter()
            .map(|&p| Tree {
                nodes: vec![Node::Leaf { positive: p, samples: 1.0 }],
            })
            .collect(),
        feature_names: vec!["f0".into()],
        kept_mask: vec![true],
        hyperparams: Hyperparams::default(),
        info: TrainingInfo { samples: 1, positives: 1 },
    }
}

#[test]
fn vote_averaging() {
    assert_eq!(hand_forest(&[1.0, 1.0, 1.0]).predict(&[0.0]).unwrap(), (1.0, 1));
    assert_eq!(hand_forest(&[0.2, 0.8]).predict(&[0.0]).unwrap(), (0.5, 1));
    assert_eq!(hand_forest(&[0.2, 0.4]).predict(&[0.0]).unwrap().1, 0);
}

#[test]
fn masked_features_are_never_split_on() {
    let (x, y) = separable(100, 4);
    let names: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
    let mask = [false, true, true, true];
    let f = train_forest_with(&x, &y, &names, &mask, &small_hp(15)).unwrap();
    for t in &f.trees {
        for n in &t.nodes {
            match *n {
                Node::Split { feature, .. } => assert!(mask[feature]),
                Node::Leaf { positive, .. } => assert!((0.0..=1.0).contains(&positive)),
            }
        }
    }
    assert_eq!(feature_importance(&f)[0], 0.0);
}

#[test]
fn single_split_takes_all_importance() {
    let x: Vec<Vec<f64>> = (0..10).map(|i| vec![0.5, i as f64]).collect();
    let y: Vec<u8> = (0..10).map(|i| u8::from(i >= 5)).collect();
    let hp = Hyperparams {
        n_trees: 1,
        bootstrap: false,
        ..Hyperparams::default()
    };
    let f = train_forest(&x, &y, &hp).unwrap();
    assert_eq!(f.trees[0].nodes.len(), 3);
    assert_eq!(feature_importance(&f), vec![0.0, 1.0]);
}

#[test]
fn planted_feature_ranks_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..400 {
        let signal: f64 = rng.gen();
        let mut label = u8::from(signal > 0.5);
        if rng.gen_bool(0.1) {
            label ^= 1;
        }
        let mut row = vec![signal];
        row.extend((0..9).map(|_| rng.gen::<f64>()));
        x.push(row);
        y.push(label);
    }
    let f = train_forest(&x, &y, &small_hp(40)).unwrap();
    let imp = feature_importance(&f);
    assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(importance_ranking(&imp)[0], 0);
}

fn route(tree: &Tree, node: usize, x: &[Vec<f64>]) -> Vec<usize> {
    // Rows of x that reach `node`.
    (0..x.len())
        .filter(|&r| {
            let mut i = 0;
            loop {
                if i == node {
                    return true;
                }
                match tree.nodes[i] {
                    Node::Leaf { .. } => return false,
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                        ..
                    } => i = if x[r][feature] <= threshold { left } else { right },
                }
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn chosen_splits_have_maximal_gain(
        rows in proptest::collection::vec((0u8..4, 0u8..4, 0u8..3, 0u8..2, any::<bool>()), 6..30),
    ) {
        let x: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0 as f64, r.1 as f64, r.2 as f64, r.3 as f64]).collect();
        let y: Vec<u8> = rows.iter().map(|r| r.4 as u8).collect();
        prop_assume!(y.contains(&0) && y.contains(&1));
        let hp = Hyperparams {
            n_trees: 1,
            bootstrap: false,
            feature_subset: FeatureSubset::All,
            ..Hyperparams::default()
        };
        let f = train_forest(&x, &y, &hp).unwrap();
        let tree = &f.trees[0];
        for (id, node) in tree.nodes.iter().enumerate() {
            let Node::Split { feature, threshold, .. } = *node else { continue };
            let reach = route(tree, id, &x);
            let labels: Vec<u8> = reach.iter().map(|&r| y[r]).collect();
            let split_gain = |f: usize, t: f64| {
                let (l, r): (Vec<usize>, Vec<usize>) = reach.iter().partition(|&&r| x[r][f] <= t);
                let lab = |v: &[usize]| v.iter().map(|&r| y[r]).collect::<Vec<u8>>();
                gain(&labels, &lab(&l), &lab(&r))
            };
            let chosen = split_gain(feature, threshold);
            for g in 0..4 {
                let mut vals: Vec<f64> = reach.iter().map(|&r| x[r][g]).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                for w in vals.windows(2) {
                    let other = split_gain(g, (w[0] + w[1]) / 2.0);
                    prop_assert!(other <= chosen + 1e-12, "feature {g} beats {feature}");
                }
            }
        }
    }

    #[test]
    fn prediction_ignores_tree_order(seed in 0u64..1000) {
        let (x, y) = separable(40, seed);
        let f = train_forest(&x, &y, &Hyperparams { n_trees: 7, seed, ..Hyperparams::default() }).unwrap();
        let mut g = f.clone();
        g.trees.reverse();
        g.trees.swap(0, 3);
        for row in &x {
            prop_assert_eq!(f.predict(row).unwrap(), g.predict(row).unwrap());
        }
    }

    #[test]
    fn importance_is_normalized(seed in 0u64..1000) {
        let (x, y) = separable(40, seed);
        let f = train_forest(&x, &y, &Hyperparams { n_trees: 5, seed, ..Hyperparams::default() }).unwrap();
        let imp = feature_importance(&f);
        prop_assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let used: Vec<bool> = (0..4)
            .map(|i| f.trees.iter().flat_map(|t| &t.nodes).any(|n| matches!(n, Node::Split { feature, .. } if *feature == i)))
            .collect();
        for i in 0..4 {
            if !used[i] {
                prop_assert_eq!(imp[i], 0.0);
            }
        }
    }
}

#[test]
fn forest_file_round_trip() {
    let (x, y) = separable(60, 6);
    let hp = Hyperparams {
        max_depth: Some(4),
        criterion: Criterion::Entropy,
        ..small_hp(6)
    };
    let f = train_forest(&x, &y, &hp).unwrap();
    let mut buf = Vec::new();
    write_forest(&f, &mut buf).unwrap();
    assert_eq!(read_forest(&buf[..]).unwrap(), f);
    assert!(read_forest(&buf[..buf.len() - 3]).is_err());
    let mut extra = buf.clone();
    extra.push(0);
    assert!(read_forest(&extra[..]).is_err());
    let dump = dump_forest(&f);
    assert!(dump.contains("tree 5") && dump.contains("leaf p="));
}

#[test]
fn metric_examples() {
    let m = Metrics::from_counts(2, 0, 4, 0);
    assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    let m = Metrics::from_counts(0, 0, 3, 5);
    assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    let m = evaluate(&[1, 1, 1, 1, 0, 0, 0], &[1, 1, 1, 0, 1, 1, 0]).unwrap();
    assert_eq!((m.true_positives, m.false_positives, m.false_negatives, m.true_negatives), (3, 1, 2, 1));
    assert_eq!(m.precision, 0.75);
    assert_eq!(m.recall, 0.6);
    assert!((m.f1 - 0.6667).abs() < 1e-4);
    assert!(evaluate(&[1], &[1, 0]).is_err());
}

#[test]
fn calibration_examples() {
    let pts = calibration(&[1.0, 1.0], &[1, 1], 10).unwrap();
    assert_eq!(pts, vec![CalibrationPoint { mean_predicted: 1.0, observed: 1.0, count: 2 }]);
    let pts = calibration(&[0.1, 0.5, 0.9, 0.3], &[0, 1, 1, 0], 1).unwrap();
    assert_eq!(pts.len(), 1);
    assert!((pts[0].mean_predicted - 0.45).abs() < 1e-12);
    assert_eq!(pts[0].observed, 0.5);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut p, mut l) = (Vec::new(), Vec::new());
    for _ in 0..50_000 {
        let q: f64 = rng.gen();
        p.push(q);
        l.push(u8::from(rng.gen::<f64>() < q));
    }
    let pts = calibration(&p, &l, 10).unwrap();
    assert_eq!(pts.len(), 10);
    for pt in pts {
        assert!((pt.mean_predicted - pt.observed).abs() < 0.05, "{pt:?}");
    }
}

fn one_line_pair(comment: &str, code: &str) -> CodeCommentPair {
    CodeCommentPair {
        kind: PairKind::Block,
        comment_text: comment.into(),
        comment_span: LineSpan::new(1, 1),
        code_lines: vec![(2, code.into())],
        enclosing_method_signature: Some("f()".into()),
        enclosing_class: Some("A".into()),
    }
}

fn pc(old: CodeCommentPair, new: CodeCommentPair) -> PairChange {
    let ops = diff(
        &pair_tree(&old, GrammarId::CurlyBrace).unwrap(),
        &pair_tree(&new, GrammarId::CurlyBrace).unwrap(),
    );
    PairChange {
        label: label_pair(&old.comment_text, &new.comment_text),
        old_pair: old,
        new_pair: new,
        ops,
        decl: DeclChange::default(),
        refactorings: RefactoringFlags::default(),
    }
}

fn unit(cos: f64) -> Vec<f64> {
    vec![cos, (1.0 - cos * cos).sqrt()]
}

#[test]
fn rule_baseline_examples() {
    let change = pc(one_line_pair("// widget", "gadget();"), one_line_pair("// widget", "gizmo();"));
    let t = PairTokens::of(&change);
    assert_eq!(t.comment.tokens, ["widget"]);
    assert_eq!(t.old_code.tokens, ["gadget"]);
    assert_eq!(t.new_code.tokens, ["gizmo"]);
    for (old_cos, new_cos, expect) in [(0.86, 0.80, 1u8), (0.86, 0.82, 0)] {
        let model = EmbeddingModel::from_vectors(&[
            ("widget", vec![1.0, 0.0]),
            ("gadget", unit(old_cos)),
            ("gizmo", unit(new_cos)),
        ])
        .unwrap();
        // One word per side: each sentence similarity is the plain cosine.
        let shift: f64 = (old_cos - new_cos).abs();
        assert_eq!(u8::from(shift > DEFAULT_RULE_THRESHOLD), expect);
        assert!((similarity_shift(&t, &model) - shift).abs() < 1e-12);
        assert_eq!(rule_baseline(&change, &model, DEFAULT_RULE_THRESHOLD), expect);
    }
    let same = pc(one_line_pair("// widget", "gadget();"), one_line_pair("// widget", "gadget();"));
    let model = EmbeddingModel::from_vectors(&[("widget", vec![1.0, 0.0])]).unwrap();
    assert_eq!(rule_baseline(&same, &model, DEFAULT_RULE_THRESHOLD), 0);
}

#[test]
fn grid_and_folds() {
    assert_eq!(ParamGrid::default().candidates(&Hyperparams::default()).len(), 864);
    let y: Vec<u8> = (0..50).map(|i| u8::from(i % 5 == 0)).collect();
    let folds = stratified_folds(&y, 5, 3);
    for k in 0..5 {
        let members: Vec<usize> = (0..50).filter(|&i| folds[i] == k).collect();
        assert_eq!(members.len(), 10);
        assert_eq!(members.iter().filter(|&&i| y[i] == 1).count(), 2);
    }
    let (x, y) = separable(90, 7);
    let grid = ParamGrid {
        n_trees: vec![5],
        criterion: vec![Criterion::Gini],
        max_depth: vec![Some(1), None],
        min_samples_split: vec![2],
        min_samples_leaf: vec![1],
        feature_subset: vec![FeatureSubset::Sqrt],
    };
    let names: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
    let r = grid_search(&x, &y, &names, &[true; 4], &grid, &Hyperparams::default(), 3).unwrap();
    assert_eq!(r.scores.len(), 2);
    assert!(r.best_f1 > 0.9);
}

#[test]
fn defaults_are_the_grid_winners() {
    let hp = Hyperparams::default();
    assert_eq!(hp.n_trees, 200);
    assert_eq!(hp.criterion, Criterion::Gini);
    assert_eq!(hp.max_depth, None);
    assert_eq!((hp.min_samples_split, hp.min_samples_leaf), (2, 1));
    assert_eq!(hp.feature_subset, FeatureSubset::Sqrt);
    assert_eq!(FeatureSubset::Sqrt.size(71), 9);
}
