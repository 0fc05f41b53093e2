//! Random-forest classifier, its evaluation, and the rule baseline.

pub mod baseline;
pub mod forest;
pub mod grid;
pub mod impurity;
pub mod io;
pub mod metrics;
pub mod tree;

pub use baseline::{rule_baseline, similarity_shift, DEFAULT_RULE_THRESHOLD};
pub use forest::{
    feature_importance, importance_ranking, train_forest, train_forest_with, FeatureSubset, Forest,
    Hyperparams, TrainingInfo,
};
pub use grid::{cross_validate, grid_search, stratified_folds, GridResult, ParamGrid};
pub use impurity::{gain, gain_with, gini, Criterion};
pub use io::{dump_forest, load_forest, read_forest, save_forest, write_forest};
pub use metrics::{calibration, evaluate, CalibrationPoint, Metrics};
pub use tree::{Node, Tree};

pub(crate) use forest::tree_rng;

#[cfg(test)]
mod tests;
