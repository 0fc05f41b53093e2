//! Exhaustive hyperparameter search scored by k-fold cross-validated F1.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::forest::{train_forest_with, FeatureSubset, Hyperparams};
use super::impurity::Criterion;
use super::metrics::evaluate;
use super::tree_rng;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub n_trees: Vec<usize>,
    pub criterion: Vec<Criterion>,
    pub max_depth: Vec<Option<usize>>,
    pub min_samples_split: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub feature_subset: Vec<FeatureSubset>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            n_trees: vec![50, 100, 200, 300],
            criterion: vec![Criterion::Gini, Criterion::Entropy],
            max_depth: vec![None, Some(5), Some(10), Some(20)],
            min_samples_split: vec![2, 5, 10],
            min_samples_leaf: vec![1, 2, 4],
            feature_subset: vec![FeatureSubset::Sqrt, FeatureSubset::Log2, FeatureSubset::All],
        }
    }
}

impl ParamGrid {
    /// Every combination, in nested field order.
    pub fn candidates(&self, base: &Hyperparams) -> Vec<Hyperparams> {
        let mut out = Vec::new();
        for &n_trees in &self.n_trees {
            for &criterion in &self.criterion {
                for &max_depth in &self.max_depth {
                    for &min_samples_split in &self.min_samples_split {
                        for &min_samples_leaf in &self.min_samples_leaf {
                            for &feature_subset in &self.feature_subset {
                                out.push(Hyperparams {
                                    n_trees,
                                    criterion,
                                    max_depth,
                                    min_samples_split,
                                    min_samples_leaf,
                                    feature_subset,
                                    ..*base
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: Hyperparams,
    pub best_f1: f64,
    /// Mean fold F1 of every candidate, in grid order.
    pub scores: Vec<(Hyperparams, f64)>,
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = tree_rng(seed, usize::MAX >> 1);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

/// Mean held-out F1 of `hp` over `folds` stratified folds.
pub fn cross_validate(
    x: &[Vec<f64>],
    y: &[u8],
    names: &[String],
    mask: &[bool],
    hp: &Hyperparams,
    folds: usize,
) -> Result<f64> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    let assignment = stratified_folds(y, folds, hp.seed);
    let mut total = 0.0;
    for k in 0..folds {
        let (mut tx, mut ty, mut vx, mut vy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (i, row) in x.iter().enumerate() {
            if assignment[i] == k {
                vx.push(row.clone());
                vy.push(y[i]);
            } else {
                tx.push(row.clone());
                ty.push(y[i]);
            }
        }
        let forest = train_forest_with(&tx, &ty, names, mask, hp)?;
        total += evaluate(&forest.labels(&vx)?, &vy)?.f1;
    }
    Ok(total / folds as f64)
}

/// Scores every grid candidate; the first candidate with the highest mean F1
/// wins.
pub fn grid_search(
    x: &[Vec<f64>],
    y: &[u8],
    names: &[String],
    mask: &[bool],
    grid: &ParamGrid,
    base: &Hyperparams,
    folds: usize,
) -> Result<GridResult> {
    let candidates = grid.candidates(base);
    if candidates.is_empty() {
        return Err(Error::invalid("empty hyperparameter grid"));
    }
    let mut scores = Vec::with_capacity(candidates.len());
    let mut best = (candidates[0], f64::NEG_INFINITY);
    for hp in candidates {
        let f1 = cross_validate(x, y, names, mask, &hp, folds)?;
        log::debug!("grid candidate {hp:?}: mean F1 {f1:.4}");
        if f1 > best.1 {
            best = (hp, f1);
        }
        scores.push((hp, f1));
    }
    Ok(GridResult {
        best: best.0,
        best_f1: best.1,
        scores,
    })
}
