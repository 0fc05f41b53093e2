//! Word embeddings over blended code/comment documents and the similarity
//! measures built on them.

pub mod documents;
pub mod io;
pub mod skipgram;

use std::collections::HashMap;

pub use documents::{build_documents, derive_seed, pair_documents, Documents};
pub use skipgram::{
    pair_gradient, pair_objective, train_skipgram, train_skipgram_with_history, PairGradient,
    SkipgramConfig,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    input: Vec<f64>,
    output: Vec<f64>,
    pub config: SkipgramConfig,
}

impl EmbeddingModel {
    /// Builds a model from flat row-major vector tables.
    pub fn from_parts(
        words: Vec<String>,
        dim: usize,
        input: Vec<f64>,
        output: Vec<f64>,
        config: SkipgramConfig,
    ) -> Result<Self> {
        if input.len() != words.len() * dim || output.len() != words.len() * dim {
            return Err(Error::invalid("vector table size does not match vocabulary"));
        }
        if input.iter().chain(&output).any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite embedding entry"));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(EmbeddingModel {
            words,
            index,
            dim,
            input,
            output,
            config,
        })
    }

    /// A model with the given input vectors and zero output vectors.
    pub fn from_vectors<S: AsRef<str>>(entries: &[(S, Vec<f64>)]) -> Result<Self> {
        let dim = entries.first().map_or(0, |(_, v)| v.len());
        if entries.iter().any(|(_, v)| v.len() != dim) {
            return Err(Error::invalid("vectors differ in length"));
        }
        let words = entries.iter().map(|(w, _)| w.as_ref().to_string()).collect();
        let input: Vec<f64> = entries.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        let output = vec![0.0; input.len()];
        let config = SkipgramConfig {
            embedding_dim: dim.max(1),
            ..SkipgramConfig::default()
        };
        Self::from_parts(words, dim, input, output, config)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn input_vector(&self, word: &str) -> Option<&[f64]> {
        let i = *self.index.get(word)?;
        Some(&self.input[i * self.dim..(i + 1) * self.dim])
    }

    pub fn output_vector(&self, word: &str) -> Option<&[f64]> {
        let i = *self.index.get(word)?;
        Some(&self.output[i * self.dim..(i + 1) * self.dim])
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0)
}

/// Cosine of the input vectors. Identical words score 1; a word missing from
/// the vocabulary otherwise scores 0.
pub fn sim_ww(w1: &str, w2: &str, model: &EmbeddingModel) -> f64 {
    if w1 == w2 {
        return 1.0;
    }
    match (model.input_vector(w1), model.input_vector(w2)) {
        (Some(a), Some(b)) => cosine(a, b),
        _ => 0.0,
    }
}

/// Best match of `w` in `sentence`; 0 for an empty sentence.
pub fn sim_ws<S: AsRef<str>>(w: &str, sentence: &[S], model: &EmbeddingModel) -> f64 {
    sentence
        .iter()
        .map(|s| sim_ww(w, s.as_ref(), model))
        .fold(None, |best: Option<f64>, x| Some(best.map_or(x, |b| b.max(x))))
        .unwrap_or(0.0)
}

fn directed<S: AsRef<str>>(from: &[S], to: &[S], model: &EmbeddingModel) -> f64 {
    let total: f64 = from.iter().map(|w| sim_ws(w.as_ref(), to, model)).sum();
    total / from.len() as f64
}

/// Mean of the two directed sentence similarities; 0 when either is empty.
pub fn sim_ss<S: AsRef<str>>(s1: &[S], s2: &[S], model: &EmbeddingModel) -> f64 {
    if s1.is_empty() || s2.is_empty() {
        return 0.0;
    }
    (directed(s1, s2, model) + directed(s2, s1, model)) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{Origin, TokenSequence};
    use proptest::prelude::*;

    fn tiny() -> EmbeddingModel {
        EmbeddingModel::from_vectors(&[
            ("a", vec![1.0, 0.0]),
            ("b", vec![0.0, 1.0]),
            ("c", vec![1.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn word_similarity() {
        let m = tiny();
        assert_eq!(sim_ww("a", "a", &m), 1.0);
        assert_eq!(sim_ww("a", "b", &m), 0.0);
        assert!((sim_ww("c", "a", &m) - 0.7071).abs() < 1e-4);
        assert_eq!(sim_ww("a", "zzz", &m), 0.0);
    }

    #[test]
    fn sentence_similarity() {
        let m = tiny();
        assert_eq!(sim_ws("a", &["b", "a"], &m), 1.0);
        assert_eq!(sim_ws("a", &["b"], &m), 0.0);
        assert_eq!(sim_ws::<&str>("a", &[], &m), 0.0);
        assert_eq!(sim_ss(&["a", "b"], &["a", "b"], &m), 1.0);
        assert_eq!(sim_ss::<&str>(&[], &["a"], &m), 0.0);
        // a->{c}: .7071, b->{c}: .7071; c->{a,b}: .7071
        let s = sim_ss(&["a", "b"], &["c"], &m);
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    fn planted_corpus() -> Vec<TokenSequence> {
        // "alpha" and "beta" always share a window; "gamma" and "delta" never
        // meet, each keeps company with its own filler words.
        let mut docs = Vec::new();
        for i in 0..200 {
            let filler = ["red", "green", "blue", "cyan", "pink"][i % 5];
            let tokens: Vec<&str> = match i % 4 {
                0 => vec!["alpha", "beta", filler, "one", "two"],
                1 => vec![filler, "beta", "alpha", "three"],
                2 => vec!["gamma", "one", filler, "four", "five"],
                _ => vec!["six", "seven", filler, "delta", "eight"],
            };
            docs.push(TokenSequence::new(tokens.into_iter().map(String::from).collect(), Origin::Code));
        }
        docs
    }

    #[test]
    fn co_occurring_words_end_closer() {
        let cfg = SkipgramConfig {
            embedding_dim: 20,
            epochs: 20,
            seed: 3,
            ..SkipgramConfig::default()
        };
        let m = train_skipgram(&planted_corpus(), &cfg).unwrap();
        assert!(sim_ww("alpha", "beta", &m) > sim_ww("gamma", "delta", &m));
        for w in m.words() {
            let v = m.input_vector(w).unwrap();
            assert!(v.iter().map(|x| x * x).sum::<f64>() > 0.0);
        }
    }

    #[test]
    fn training_is_deterministic_and_objective_settles() {
        let cfg = SkipgramConfig {
            embedding_dim: 16,
            epochs: 8,
            seed: 11,
            ..SkipgramConfig::default()
        };
        let corpus = planted_corpus();
        let (a, hist) = train_skipgram_with_history(&corpus, &cfg).unwrap();
        let b = train_skipgram(&corpus, &cfg).unwrap();
        assert_eq!(a, b);
        let half = &hist[hist.len() / 2..];
        assert!(half.windows(2).all(|w| w[1] >= w[0]), "{hist:?}");
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(train_skipgram(&[], &SkipgramConfig::default()).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = vec![0.3, -0.2, 0.5];
        let x = vec![0.1, 0.4, -0.3];
        let n1 = vec![-0.2, 0.2, 0.1];
        let negs: Vec<&[f64]> = vec![&n1];
        let g = pair_gradient(&c, &x, &negs);
        let h = 1e-6;
        for i in 0..3 {
            let (mut p, mut m) = (c.clone(), c.clone());
            p[i] += h;
            m[i] -= h;
            let fd = (pair_objective(&p, &x, &negs) - pair_objective(&m, &x, &negs)) / (2.0 * h);
            assert!((fd - g.center[i]).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn sentence_similarity_is_symmetric(
            a in proptest::collection::vec(0usize..3, 1..6),
            b in proptest::collection::vec(0usize..3, 1..6),
        ) {
            let m = tiny();
            let names = ["a", "b", "c"];
            let s1: Vec<&str> = a.iter().map(|&i| names[i]).collect();
            let s2: Vec<&str> = b.iter().map(|&i| names[i]).collect();
            prop_assert!((sim_ss(&s1, &s2, &m) - sim_ss(&s2, &s1, &m)).abs() < 1e-12);
            prop_assert!((sim_ss(&s1, &s1, &m) - 1.0).abs() < 1e-12);
        }
    }
}
