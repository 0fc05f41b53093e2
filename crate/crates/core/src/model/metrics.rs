//! Classification scores and reliability curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn share(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let precision = share(tp, tp + fp);
        let recall = share(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
            precision,
            recall,
            f1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    pub fn accuracy(&self) -> f64 {
        share(self.true_positives + self.true_negatives, self.total())
    }
}

pub fn evaluate(predictions: &[u8], labels: &[u8]) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p != 0, l != 0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, tn, fn_))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub mean_predicted: f64,
    pub observed: f64,
    pub count: usize,
}

/// Equal-width bins over [0, 1]; a probability of exactly 1 falls in the
/// last bin. Empty bins are left out.
pub fn calibration(probabilities: &[f64], labels: &[u8], bin_count: usize) -> Result<Vec<CalibrationPoint>> {
    if probabilities.len() != labels.len() {
        return Err(Error::invalid("probabilities and labels differ in length"));
    }
    if bin_count == 0 {
        return Err(Error::invalid("bin_count must be positive"));
    }
    if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid("probability outside [0, 1]"));
    }
    let mut sums = vec![(0.0, 0usize, 0usize); bin_count];
    for (&p, &l) in probabilities.iter().zip(labels) {
        let b = ((p * bin_count as f64) as usize).min(bin_count - 1);
        sums[b].0 += p;
        sums[b].1 += usize::from(l != 0);
        sums[b].2 += 1;
    }
    Ok(sums
        .into_iter()
        .filter(|s| s.2 > 0)
        .map(|(p, pos, n)| CalibrationPoint {
            mean_predicted: p / n as f64,
            observed: pos as f64 / n as f64,
            count: n,
        })
        .collect())
}
