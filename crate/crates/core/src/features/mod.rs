//! The named feature vector of a pair change.

pub mod correlation;
pub mod matrix;
pub mod standardize;

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use correlation::{filter_correlated, pearson};
pub use matrix::{read_matrix, write_matrix, FeatureMatrix};
pub use standardize::{standardize, Standardizer};

pub use crate::change::PairChange;
use crate::distiller::diff::{count_changes, Action, ChangeOp};
use crate::distiller::lexer::token_texts;
use crate::distiller::tree::StatementKind;
use crate::embed::{sim_ss, sim_ws, EmbeddingModel};
use crate::lexicon::{normalize, pos_distance, pos_distribution, Origin, Pos, TokenSequence};
use crate::refactor::RefactoringFlags;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Binary,
    Count,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Code,
    Comment,
    Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    pub group: FeatureGroup,
}

pub const COMMENT_KEYWORDS: [&str; 4] = ["todo", "fix", "version", "bug"];
pub const RELATION_NAMES: [&str; 4] = [
    "d_cmt_smt",
    "d_token_code",
    "d_cmt_code",
    "common_token_pair_distance",
];

/// All features in vector order.
pub fn feature_specs() -> &'static [FeatureSpec] {
    static SPECS: OnceLock<Vec<FeatureSpec>> = OnceLock::new();
    SPECS.get_or_init(|| {
        use FeatureGroup::*;
        use FeatureKind::*;
        let mut v = Vec::new();
        let mut push = |name: String, kind, group| v.push(FeatureSpec { name, kind, group });
        for n in ["class_attributes_change", "method_name_change", "return_type_change", "parameter_change"] {
            push(n.into(), Binary, Code);
        }
        push("code_line_proportion".into(), Continuous, Code);
        push("changed_line_proportion".into(), Continuous, Code);
        for k in StatementKind::COUNTED {
            for a in Action::ALL {
                push(format!("stmt_{}_{}", k.name(), a.name()), Count, Code);
            }
        }
        for n in RefactoringFlags::NAMES {
            push(format!("refactor_{n}"), Binary, Code);
        }
        for p in Pos::ALL {
            push(format!("code_pos_{}_distance", p.name()), Continuous, Code);
        }
        push("number_of_changes".into(), Count, Code);
        push("contains_return".into(), Binary, Code);
        for k in COMMENT_KEYWORDS {
            push(format!("comment_{k}"), Binary, Comment);
        }
        for p in Pos::ALL {
            push(format!("comment_pos_{}", p.name()), Continuous, Comment);
        }
        for n in &RELATION_NAMES[..3] {
            push((*n).into(), Continuous, Relation);
        }
        push(RELATION_NAMES[3].into(), Count, Relation);
        v
    })
}

pub fn feature_names() -> Vec<String> {
    feature_specs().iter().map(|s| s.name.clone()).collect()
}

pub fn feature_kinds() -> Vec<FeatureKind> {
    feature_specs().iter().map(|s| s.kind).collect()
}

pub const FEATURE_COUNT: usize = 71;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Statement-change counts become 0/1 presence flags.
    #[serde(default)]
    pub binarize_counts: bool,
    /// `contains_return` reads a `@return` tag in the comment instead of a
    /// return statement in the code.
    #[serde(default)]
    pub return_from_comment_tag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_specs()
            .iter()
            .position(|s| s.name == name)
            .map(|i| self.values[i])
    }
}

/// Normalized token sequences of a pair change.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTokens {
    pub comment: TokenSequence,
    pub old_code: TokenSequence,
    pub new_code: TokenSequence,
    pub old_statements: TokenSequence,
    pub new_statements: TokenSequence,
}

impl PairTokens {
    pub fn of(pc: &PairChange) -> Self {
        let side = |pick: fn(&ChangeOp) -> Option<&String>| {
            let text: Vec<&str> = pc.ops.iter().filter_map(pick).map(String::as_str).collect();
            normalize(&text.join("\n"), Origin::Code)
        };
        PairTokens {
            comment: normalize(&pc.old_pair.comment_body(), Origin::Comment),
            old_code: normalize(&pc.old_pair.code_text(), Origin::Code),
            new_code: normalize(&pc.new_pair.code_text(), Origin::Code),
            old_statements: side(|op| op.old_text.as_ref()),
            new_statements: side(|op| op.new_text.as_ref()),
        }
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        (num as f64 / den as f64).min(1.0)
    }
}

fn span_lines(ops: &[ChangeOp], pick: fn(&ChangeOp) -> Option<crate::distiller::LineSpan>) -> HashSet<usize> {
    ops.iter()
        .filter_map(pick)
        .flat_map(|s| s.start..=s.end)
        .collect()
}

/// The 53 code features.
pub fn code_features(pc: &PairChange, tokens: &PairTokens, config: &FeatureConfig) -> Vec<f64> {
    let mut v = Vec::with_capacity(53);
    let d = &pc.decl;
    v.extend([
        flag(d.class_attributes_changed),
        flag(d.method_name_changed),
        flag(d.return_type_changed),
        flag(d.parameters_changed),
    ]);

    let old = &pc.old_pair;
    v.push(ratio(old.code_lines.len(), old.line_count()));
    let changed_old = span_lines(&pc.ops, |op| match op.action {
        Action::Add => None,
        _ => op.old_span,
    });
    let added_new = span_lines(&pc.ops, |op| match op.action {
        Action::Add => op.new_span,
        _ => None,
    });
    v.push(ratio(
        changed_old.len() + added_new.len(),
        old.line_count() + added_new.len(),
    ));

    for k in StatementKind::COUNTED {
        for a in Action::ALL {
            let n = pc.ops.iter().filter(|op| op.kind == k && op.action == a).count();
            v.push(if config.binarize_counts { flag(n > 0) } else { n as f64 });
        }
    }
    v.extend(pc.refactorings.values().map(flag));
    v.extend(pos_distance(
        &pos_distribution(&tokens.old_code),
        &pos_distribution(&tokens.new_code),
    ));
    v.push(count_changes(&pc.ops) as f64);
    let has_return = if config.return_from_comment_tag {
        old.comment_text.contains("@return")
    } else {
        let returns = |text: String| token_texts(&text).iter().any(|t| t == "return");
        returns(old.code_text()) || returns(pc.new_pair.code_text())
    };
    v.push(flag(has_return));
    v
}

/// The 14 comment features: keyword flags and part-of-speech proportions.
pub fn comment_features(comment: &str) -> Vec<f64> {
    let lower = comment.to_lowercase();
    let mut v = vec![
        flag(lower.contains("todo")),
        flag(lower.contains("fixme") || lower.contains("fixed")),
        flag(lower.contains("version")),
        flag(lower.contains("bug")),
    ];
    let body = crate::linker::comment_body(comment);
    v.extend(pos_distribution(&normalize(&body, Origin::Comment)));
    v
}

fn shared(a: &TokenSequence, b: &TokenSequence) -> usize {
    let x: HashSet<&str> = a.tokens.iter().map(String::as_str).collect();
    let y: HashSet<&str> = b.tokens.iter().map(String::as_str).collect();
    x.intersection(&y).count()
}

/// Similarity distances between the comment and the code before and after
/// the change, plus the change in shared token count.
pub fn relation_features(tokens: &PairTokens, model: &EmbeddingModel) -> [f64; 4] {
    let t = tokens;
    let cmt = &t.comment.tokens;
    let d_smt = (sim_ss(cmt, &t.old_statements.tokens, model)
        - sim_ss(cmt, &t.new_statements.tokens, model))
    .abs();
    let d_token = if cmt.is_empty() {
        0.0
    } else {
        cmt.iter()
            .map(|w| (sim_ws(w, &t.old_code.tokens, model) - sim_ws(w, &t.new_code.tokens, model)).abs())
            .sum::<f64>()
            / cmt.len() as f64
    };
    let d_code = (sim_ss(cmt, &t.old_code.tokens, model) - sim_ss(cmt, &t.new_code.tokens, model)).abs();
    let common = shared(&t.comment, &t.old_code) as f64 - shared(&t.comment, &t.new_code) as f64;
    [d_smt, d_token, d_code, common]
}

pub fn extract_features(pc: &PairChange, model: &EmbeddingModel, config: &FeatureConfig) -> FeatureVector {
    let tokens = PairTokens::of(pc);
    let mut values = code_features(pc, &tokens, config);
    values.extend(comment_features(&pc.old_pair.comment_text));
    values.extend(relation_features(&tokens, model));
    debug_assert_eq!(values.len(), FEATURE_COUNT);
    FeatureVector { values }
}

#[cfg(test)]
mod tests;
