//! Z-scoring of continuous feature columns.

use serde::{Deserialize, Serialize};

use super::FeatureKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations.
    pub stds: Vec<f64>,
    pub scaled: Vec<bool>,
}

impl Standardizer {
    /// Column statistics over `rows`; only `Continuous` columns are scaled.
    pub fn fit(rows: &[Vec<f64>], kinds: &[FeatureKind]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid("standardization needs at least two rows"));
        }
        let width = kinds.len();
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::LayoutMismatch {
                expected: width,
                actual: r.len(),
            });
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; width];
        let mut stds = vec![0.0; width];
        for j in 0..width {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            means[j] = mean;
            stds[j] = var.sqrt();
        }
        Ok(Standardizer {
            means,
            stds,
            scaled: kinds.iter().map(|k| *k == FeatureKind::Continuous).collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.width() {
            return Err(Error::LayoutMismatch {
                expected: self.width(),
                actual: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                if !self.scaled[j] {
                    x
                } else if self.stds[j] == 0.0 {
                    0.0
                } else {
                    (x - self.means[j]) / self.stds[j]
                }
            })
            .collect())
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

/// Fits on `rows` and transforms them.
pub fn standardize(rows: &[Vec<f64>], kinds: &[FeatureKind]) -> Result<Vec<Vec<f64>>> {
    Standardizer::fit(rows, kinds)?.transform_all(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use FeatureKind::*;

    #[test]
    fn examples() {
        let rows = vec![vec![1.0, 5.0, 1.0], vec![2.0, 5.0, 0.0], vec![3.0, 5.0, 1.0]];
        let out = standardize(&rows, &[Continuous, Continuous, Binary]).unwrap();
        // Population std of [1,2,3] is sqrt(2/3).
        assert_abs_diff_eq!(out[0][0], -1.224744871391589, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1][0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[2][0], 1.224744871391589, epsilon = 1e-12);
        assert!(out.iter().all(|r| r[1] == 0.0));
        assert_eq!(out.iter().map(|r| r[2]).collect::<Vec<_>>(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn single_row_is_rejected() {
        assert!(standardize(&[vec![1.0]], &[Continuous]).is_err());
    }
}
