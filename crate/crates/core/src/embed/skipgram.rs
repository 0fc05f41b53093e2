//! Skip-gram training with negative sampling.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EmbeddingModel;
use crate::error::{Error, Result};
use crate::lexicon::TokenSequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipgramConfig {
    /// Context words on each side of the center; the window is `2k+1`.
    pub window_radius: usize,
    pub embedding_dim: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            window_radius: 2,
            embedding_dim: 100,
            negative_samples: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 1,
        }
    }
}

impl SkipgramConfig {
    pub fn window(&self) -> usize {
        2 * self.window_radius + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_radius == 0
            || self.embedding_dim == 0
            || self.negative_samples == 0
            || self.epochs == 0
        {
            return Err(Error::invalid("skip-gram sizes must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling objective for one (center, context, negatives) triple:
/// `log σ(ctx·c) + Σ log σ(-neg·c)`.
pub fn pair_objective(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    let mut obj = sigmoid(dot(context, center)).ln();
    for n in negatives {
        obj += sigmoid(-dot(n, center)).ln();
    }
    obj
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`pair_objective`] with respect to every vector.
pub fn pair_gradient(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let g = 1.0 - sigmoid(dot(context, center));
    let mut d_center: Vec<f64> = context.iter().map(|x| g * x).collect();
    let d_context: Vec<f64> = center.iter().map(|x| g * x).collect();
    let mut d_neg = Vec::with_capacity(negatives.len());
    for n in negatives {
        let s = sigmoid(dot(n, center));
        for (dc, x) in d_center.iter_mut().zip(n.iter()) {
            *dc -= s * x;
        }
        d_neg.push(center.iter().map(|x| -s * x).collect());
    }
    PairGradient {
        center: d_center,
        context: d_context,
        negatives: d_neg,
    }
}

/// Cumulative noise distribution over the vocabulary, unigram^0.75.
struct Noise {
    cumulative: Vec<f64>,
}

impl Noise {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Noise { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

struct Trainer<'a> {
    config: &'a SkipgramConfig,
    dim: usize,
    input: Vec<f64>,
    output: Vec<f64>,
    noise: Noise,
    corpus: Vec<Vec<usize>>,
}

impl Trainer<'_> {
    fn pairs(&self, mut visit: impl FnMut(usize, usize)) {
        let k = self.config.window_radius;
        for sentence in &self.corpus {
            for (i, &center) in sentence.iter().enumerate() {
                let lo = i.saturating_sub(k);
                let hi = (i + k + 1).min(sentence.len());
                for (j, &ctx) in sentence.iter().enumerate().take(hi).skip(lo) {
                    if j != i {
                        visit(center, ctx);
                    }
                }
            }
        }
    }

    fn draw_negatives(&self, target: usize, rng: &mut impl Rng, out: &mut Vec<usize>) {
        out.clear();
        // Vocabularies of one word have no valid negatives.
        if self.noise.cumulative.len() < 2 {
            return;
        }
        while out.len() < self.config.negative_samples {
            let n = self.noise.sample(rng);
            if n != target {
                out.push(n);
            }
        }
    }

    fn step(&mut self, center: usize, ctx: usize, negatives: &[usize], lr: f64) {
        let d = self.dim;
        let c0 = center * d;
        let mut acc = vec![0.0; d];
        let targets = std::iter::once((ctx, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
        for (t, label) in targets {
            let o0 = t * d;
            let score = dot(&self.input[c0..c0 + d], &self.output[o0..o0 + d]);
            let g = lr * (label - sigmoid(score));
            for i in 0..d {
                acc[i] += g * self.output[o0 + i];
                self.output[o0 + i] += g * self.input[c0 + i];
            }
        }
        for i in 0..d {
            self.input[c0 + i] += acc[i];
        }
    }

    fn average_objective(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let d = self.dim;
        let (mut total, mut n) = (0.0, 0usize);
        let mut negs = Vec::new();
        self.pairs(|center, ctx| {
            self.draw_negatives(ctx, &mut rng, &mut negs);
            let nv: Vec<&[f64]> = negs.iter().map(|&x| &self.output[x * d..x * d + d]).collect();
            total += pair_objective(
                &self.input[center * d..center * d + d],
                &self.output[ctx * d..ctx * d + d],
                &nv,
            );
            n += 1;
        });
        if n == 0 {
            0.0
        } else {
            total / n as f64
        }
    }
}

pub fn train_skipgram(corpus: &[TokenSequence], config: &SkipgramConfig) -> Result<EmbeddingModel> {
    train(corpus, config, false).map(|(m, _)| m)
}

/// Trains and also reports the average objective after every epoch, each
/// evaluated against the same fixed draw of negatives.
pub fn train_skipgram_with_history(
    corpus: &[TokenSequence],
    config: &SkipgramConfig,
) -> Result<(EmbeddingModel, Vec<f64>)> {
    train(corpus, config, true)
}

fn train(corpus: &[TokenSequence], config: &SkipgramConfig, track: bool) -> Result<(EmbeddingModel, Vec<f64>)> {
    config.validate()?;
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in corpus {
        for t in &s.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::invalid("empty training corpus"));
    }
    let mut vocab: Vec<(&str, u64)> = counts.into_iter().collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
    let freq: Vec<u64> = vocab.iter().map(|(_, c)| *c).collect();

    let dim = config.embedding_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / dim as f64;
    let input: Vec<f64> = (0..vocab.len() * dim).map(|_| rng.gen_range(-bound..bound)).collect();
    let mut trainer = Trainer {
        config,
        dim,
        input,
        output: vec![0.0; vocab.len() * dim],
        noise: Noise::new(&freq),
        corpus: corpus
            .iter()
            .map(|s| s.tokens.iter().map(|t| index[t.as_str()]).collect())
            .collect(),
    };

    let mut schedule = Vec::new();
    trainer.pairs(|c, x| schedule.push((c, x)));
    let total = (schedule.len() * config.epochs).max(1) as f64;
    let floor = config.learning_rate * 1e-4;
    let mut history = Vec::new();
    let mut negs = Vec::new();
    let mut step = 0usize;
    for _ in 0..config.epochs {
        for &(center, ctx) in &schedule {
            let lr = (config.learning_rate * (1.0 - step as f64 / total)).max(floor);
            trainer.draw_negatives(ctx, &mut rng, &mut negs);
            trainer.step(center, ctx, &negs, lr);
            step += 1;
        }
        if track {
            history.push(trainer.average_objective(config.seed));
        }
    }

    let words: Vec<String> = vocab.iter().map(|(w, _)| w.to_string()).collect();
    let model = EmbeddingModel::from_parts(words, dim, trainer.input, trainer.output, *config)?;
    Ok((model, history))
}
