//! Threshold rule on the change in comment/code similarity.

use crate::change::PairChange;
use crate::embed::{sim_ss, EmbeddingModel};
use crate::features::PairTokens;

pub const DEFAULT_RULE_THRESHOLD: f64 = 0.05;

/// `|sim(comment, old code) - sim(comment, new code)|`.
pub fn similarity_shift(tokens: &PairTokens, model: &EmbeddingModel) -> f64 {
    let c = &tokens.comment.tokens;
    (sim_ss(c, &tokens.old_code.tokens, model) - sim_ss(c, &tokens.new_code.tokens, model)).abs()
}

/// 1 when the similarity shift exceeds `threshold`.
pub fn rule_baseline(pc: &PairChange, model: &EmbeddingModel, threshold: f64) -> u8 {
    u8::from(similarity_shift(&PairTokens::of(pc), model) > threshold)
}
