//! Node impurity and split gain.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    /// Impurity from (weighted) class counts.
    pub fn impurity(self, negatives: f64, positives: f64) -> f64 {
        let n = negatives + positives;
        if n <= 0.0 {
            return 0.0;
        }
        let (p0, p1) = (negatives / n, positives / n);
        match self {
            Criterion::Gini => 1.0 - p0 * p0 - p1 * p1,
            Criterion::Entropy => {
                let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
                h(p0) + h(p1)
            }
        }
    }
}

fn counts(labels: &[u8]) -> (f64, f64) {
    let pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    (labels.len() as f64 - pos, pos)
}

/// `1 - p0² - p1²`; 0 for an empty set.
pub fn gini(labels: &[u8]) -> f64 {
    let (n, p) = counts(labels);
    Criterion::Gini.impurity(n, p)
}

/// Impurity decrease of splitting `parent` into `left` and `right`, with
/// children weighted by their share of the parent.
pub fn gain(parent: &[u8], left: &[u8], right: &[u8]) -> f64 {
    gain_with(Criterion::Gini, parent, left, right)
}

pub fn gain_with(criterion: Criterion, parent: &[u8], left: &[u8], right: &[u8]) -> f64 {
    let n = parent.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let imp = |s: &[u8]| {
        let (a, b) = counts(s);
        criterion.impurity(a, b)
    };
    imp(parent) - left.len() as f64 / n * imp(left) - right.len() as f64 / n * imp(right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[1, 1, 1]), 0.0);
        assert_eq!(gini(&[1, 1, 0, 0]), 0.5);
        assert_eq!(gini(&[1, 0, 0, 0]), 0.375);
        assert_eq!(gini(&[]), 0.0);
    }

    #[test]
    fn gain_values() {
        assert_eq!(gain(&[1, 1, 0, 0], &[1, 1], &[0, 0]), 0.5);
        assert!(gain(&[1, 0, 1, 0], &[1, 0], &[1, 0]).abs() < 1e-15);
        assert!((gain(&[1, 1, 0, 0], &[1, 1, 0], &[0]) - (0.5 - 0.75 * 4.0 / 9.0)).abs() < 1e-9);
        assert_eq!(gain(&[1, 0], &[], &[1, 0]), 0.0);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(Criterion::Entropy.impurity(2.0, 2.0), 1.0);
        assert_eq!(Criterion::Entropy.impurity(0.0, 3.0), 0.0);
    }
}
