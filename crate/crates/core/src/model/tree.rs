//! A single CART classification tree over weighted rows.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::impurity::Criterion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Positive-class probability; the negative class has `1 - positive`.
        positive: f64,
        samples: f64,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
        samples: f64,
        /// Impurity decrease times the node's share of the tree's samples.
        decrease: f64,
    },
}

impl Node {
    pub fn samples(&self) -> f64 {
        match *self {
            Node::Leaf { samples, .. } | Node::Split { samples, .. } => samples,
        }
    }
}

/// Nodes in preorder; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Positive-class probability of the leaf `x` lands in.
    pub fn probability(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { positive, .. } => positive,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Non-constant features to examine per node.
    pub features_per_node: usize,
}

/// A row of the training set and its bootstrap multiplicity.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub row: u32,
    pub weight: u32,
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

pub(crate) struct Builder<'a, R> {
    /// Column-major feature values.
    pub columns: &'a [Vec<f64>],
    pub labels: &'a [u8],
    pub params: TreeParams,
    pub rng: &'a mut R,
    nodes: Vec<Node>,
    total: f64,
    order: Vec<usize>,
    buf: Vec<(f64, u32, u8)>,
}

/// Midpoint of two consecutive distinct values, kept strictly below `hi`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = lo + (hi - lo) / 2.0;
    if t >= hi || t < lo {
        lo
    } else {
        t
    }
}

impl<'a, R: Rng> Builder<'a, R> {
    pub fn new(
        columns: &'a [Vec<f64>],
        labels: &'a [u8],
        candidates: &'a [usize],
        params: TreeParams,
        rng: &'a mut R,
    ) -> Self {
        Builder {
            columns,
            labels,
            params,
            rng,
            nodes: Vec::new(),
            total: 0.0,
            order: candidates.to_vec(),
            buf: Vec::new(),
        }
    }

    pub fn build(mut self, samples: &mut [Sample]) -> Tree {
        self.total = samples.iter().map(|s| s.weight as f64).sum();
        self.grow(samples, 0);
        Tree { nodes: self.nodes }
    }

    fn class_weights(&self, samples: &[Sample]) -> (f64, f64) {
        let (mut neg, mut pos) = (0u64, 0u64);
        for s in samples {
            if self.labels[s.row as usize] == 1 {
                pos += s.weight as u64;
            } else {
                neg += s.weight as u64;
            }
        }
        (neg as f64, pos as f64)
    }

    fn grow(&mut self, samples: &mut [Sample], depth: usize) -> usize {
        let (neg, pos) = self.class_weights(samples);
        let n = neg + pos;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            positive: pos / n,
            samples: n,
        });
        let p = self.params;
        if neg == 0.0
            || pos == 0.0
            || n < p.min_samples_split as f64
            || p.max_depth.is_some_and(|d| depth >= d)
        {
            return id;
        }
        let parent = p.criterion.impurity(neg, pos);
        let Some(best) = self.best_split(samples, neg, pos, parent) else {
            return id;
        };
        let (f, t) = (best.feature, best.threshold);
        let column = &self.columns[f];
        let mut mid = 0;
        for i in 0..samples.len() {
            if column[samples[i].row as usize] <= t {
                samples.swap(i, mid);
                mid += 1;
            }
        }
        let (l, r) = samples.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: f,
            threshold: t,
            left,
            right,
            samples: n,
            decrease: n / self.total * best.gain,
        };
        id
    }

    fn best_split(&mut self, samples: &[Sample], neg: f64, pos: f64, parent: f64) -> Option<Best> {
        let p = self.params;
        let n = neg + pos;
        let min_leaf = p.min_samples_leaf as f64;
        self.order.shuffle(self.rng);
        let mut best: Option<Best> = None;
        let mut visited = 0;
        for k in 0..self.order.len() {
            if visited == p.features_per_node {
                break;
            }
            let f = self.order[k];
            let column = &self.columns[f];
            self.buf.clear();
            self.buf.extend(
                samples
                    .iter()
                    .map(|s| (column[s.row as usize], s.weight, self.labels[s.row as usize])),
            );
            self.buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if self.buf[0].0 == self.buf[self.buf.len() - 1].0 {
                continue;
            }
            visited += 1;
            let (mut ln, mut lp) = (0.0, 0.0);
            for i in 0..self.buf.len() - 1 {
                let (v, w, y) = self.buf[i];
                if y == 1 {
                    lp += w as f64;
                } else {
                    ln += w as f64;
                }
                let next = self.buf[i + 1].0;
                if v == next {
                    continue;
                }
                let nl = ln + lp;
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let gain = parent
                    - nl / n * p.criterion.impurity(ln, lp)
                    - nr / n * p.criterion.impurity(neg - ln, pos - lp);
                let threshold = midpoint(v, next);
                let better = match &best {
                    None => true,
                    Some(b) => {
                        gain > b.gain
                            || (gain == b.gain
                                && (f < b.feature || (f == b.feature && threshold < b.threshold)))
                    }
                };
                if better {
                    best = Some(Best {
                        gain,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoints_stay_between_values() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(a <= t && t < b);
        assert!(midpoint(-f64::MAX, f64::MAX).is_finite());
    }
}
