//! Code-comment pair extraction and cross-revision alignment.

use serde::{Deserialize, Serialize};

use crate::distiller::tree::{AttachedComment, LineSpan, NodeId, NodeKind, Structural, SyntaxTree};
use crate::distiller::lexer::token_texts;
use crate::text::{bigram_dice, token_dice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Method,
    Block,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeCommentPair {
    pub kind: PairKind,
    /// Raw comment text; merged comments are joined by newlines.
    pub comment_text: String,
    pub comment_span: LineSpan,
    pub code_lines: Vec<(usize, String)>,
    #[serde(default)]
    pub enclosing_method_signature: Option<String>,
    #[serde(default)]
    pub enclosing_class: Option<String>,
}

impl CodeCommentPair {
    pub fn code_text(&self) -> String {
        let lines: Vec<&str> = self.code_lines.iter().map(|(_, l)| l.as_str()).collect();
        lines.join("\n")
    }

    /// Comment text with delimiters removed and whitespace collapsed.
    pub fn comment_body(&self) -> String {
        comment_body(&self.comment_text)
    }

    pub fn method_name(&self) -> Option<&str> {
        self.enclosing_method_signature
            .as_deref()
            .map(|s| s.split('(').next().unwrap_or(s))
    }

    /// Number of lines the pair occupies: comment lines plus code lines.
    pub fn line_count(&self) -> usize {
        self.comment_span.lines() + self.code_lines.len()
    }
}

/// Strips `//`, `/*`, `*/` and leading `*` from every line, collapses
/// whitespace runs and trims. Case is preserved.
pub fn comment_body(text: &str) -> String {
    let mut words = Vec::new();
    for line in text.lines() {
        let mut l = line.trim();
        l = l.strip_suffix("*/").unwrap_or(l);
        l = l.trim_start_matches('/').trim_start_matches('*');
        words.extend(l.split_whitespace());
    }
    words.join(" ")
}

/// Source lines intersecting `lo..hi`, with comment text cut out and blank
/// results dropped.
fn code_lines(source: &str, lo: usize, hi: usize, comments: &[(usize, usize)]) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (n, raw) in source.split('\n').enumerate() {
        let (ls, le) = (offset, offset + raw.len());
        offset = le + 1;
        let (a, b) = (ls.max(lo), le.min(hi));
        if a >= b {
            if ls >= hi {
                break;
            }
            continue;
        }
        let mut text = String::new();
        let mut pos = a;
        for &(cs, ce) in comments {
            if ce <= pos || cs >= b {
                continue;
            }
            if cs > pos {
                text.push_str(&source[pos..cs]);
            }
            text.push(' ');
            pos = ce.max(pos);
        }
        if pos < b {
            text.push_str(&source[pos..b]);
        }
        let text = text.trim();
        if !text.is_empty() {
            out.push((n + 1, text.to_string()));
        }
    }
    out
}

/// Comments eligible for pairing, grouped so that comments with no code
/// between them form one group.
fn comment_groups(tree: &SyntaxTree) -> Vec<Vec<&AttachedComment>> {
    let mut groups: Vec<Vec<&AttachedComment>> = Vec::new();
    for c in tree.comments.iter().filter(|c| !c.comment.trailing && !c.inside_statement) {
        match groups.last_mut() {
            Some(g) if g[0].parent == c.parent && g[0].comment.next_token == c.comment.next_token => {
                g.push(c)
            }
            _ => groups.push(vec![c]),
        }
    }
    groups
}

fn merged(group: &[&AttachedComment]) -> (String, LineSpan) {
    let text: Vec<&str> = group.iter().map(|c| c.comment.text.as_str()).collect();
    let span = LineSpan::new(
        group[0].comment.start_line,
        group[group.len() - 1].comment.end_line,
    );
    (text.join("\n"), span)
}

fn comment_ranges(tree: &SyntaxTree) -> Vec<(usize, usize)> {
    tree.comments.iter().map(|c| (c.comment.start, c.comment.end)).collect()
}

fn context(tree: &SyntaxTree, node: NodeId) -> (Option<String>, Option<String>) {
    let method = tree.enclosing_method(node);
    let class = match method {
        Some(m) => m.class.clone(),
        None => tree.enclosing_class(node).map(|c| c.name.clone()),
    };
    (method.map(|m| m.key()), class)
}

/// Block-type pairs: comments inside method bodies and the statements they
/// govern. A scope runs from the comment to the next comment group of the
/// same parent, or to the end of that parent's body.
pub fn extract_block_pairs(source: &str, tree: &SyntaxTree) -> Vec<CodeCommentPair> {
    let groups = comment_groups(tree);
    let ranges = comment_ranges(tree);
    let mut out = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        let head = group[0];
        if tree.enclosing_method(head.parent).is_none() {
            continue;
        }
        let children = &tree.node(head.parent).children;
        let stop = groups[g + 1..]
            .iter()
            .find(|other| other[0].parent == head.parent)
            .map_or(children.len(), |other| other[0].index);
        if head.index >= stop {
            continue;
        }
        let scope = &children[head.index..stop];
        let lo = tree.tokens[tree.node(scope[0]).tokens.start].start;
        let hi = tree.tokens[tree.node(scope[scope.len() - 1]).tokens.end - 1].end;
        let lines = code_lines(source, lo, hi, &ranges);
        if lines.is_empty() {
            continue;
        }
        let (comment_text, comment_span) = merged(group);
        let (sig, class) = context(tree, head.parent);
        out.push(CodeCommentPair {
            kind: PairKind::Block,
            comment_text,
            comment_span,
            code_lines: lines,
            enclosing_method_signature: sig,
            enclosing_class: class,
        });
    }
    out
}

/// Method-type pairs: a header comment directly before a method (annotations
/// may sit in between) and the method body without its interior comments.
pub fn extract_method_pairs(source: &str, tree: &SyntaxTree) -> Vec<CodeCommentPair> {
    let groups = comment_groups(tree);
    let ranges = comment_ranges(tree);
    let mut out = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        let head = group[0];
        let Some(&target) = tree.node(head.parent).children.get(head.index) else {
            continue;
        };
        if tree.node(target).kind != NodeKind::Structural(Structural::Method) {
            continue;
        }
        // Only the closest group documents the method.
        if groups
            .get(g + 1)
            .is_some_and(|next| next[0].parent == head.parent && next[0].index == head.index)
        {
            continue;
        }
        let Some(method) = tree.method(target) else {
            continue;
        };
        let lines = match tree.node(target).body {
            Some((open, close)) => {
                code_lines(source, tree.tokens[open].end, tree.tokens[close].start, &ranges)
            }
            None => Vec::new(),
        };
        let (comment_text, comment_span) = merged(group);
        out.push(CodeCommentPair {
            kind: PairKind::Method,
            comment_text,
            comment_span,
            code_lines: lines,
            enclosing_method_signature: Some(method.key()),
            enclosing_class: method.class.clone(),
        });
    }
    out
}

/// Method pairs followed by block pairs.
pub fn extract_pairs(source: &str, tree: &SyntaxTree) -> Vec<CodeCommentPair> {
    let mut pairs = extract_method_pairs(source, tree);
    pairs.extend(extract_block_pairs(source, tree));
    pairs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub old: Option<CodeCommentPair>,
    pub new: Option<CodeCommentPair>,
    pub match_score: f64,
}

impl AlignedPair {
    pub fn is_matched(&self) -> bool {
        self.old.is_some() && self.new.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    pub method_body_threshold: f64,
    pub block_comment_threshold: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            method_body_threshold: 0.6,
            block_comment_threshold: 0.5,
        }
    }
}

fn body_tokens(pair: &CodeCommentPair) -> Vec<String> {
    token_texts(&pair.code_text())
}

/// Greedy one-to-one assignment over scored candidates. Candidates are
/// `(score, old, new)`; ties prefer close ordinals, then low ones.
fn assign(mut candidates: Vec<(f64, usize, usize)>, used_old: &mut [bool], used_new: &mut [bool]) -> Vec<(f64, usize, usize)> {
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.abs_diff(a.2).cmp(&b.1.abs_diff(b.2)))
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut out = Vec::new();
    for (s, i, j) in candidates {
        if !used_old[i] && !used_new[j] {
            used_old[i] = true;
            used_new[j] = true;
            out.push((s, i, j));
        }
    }
    out
}

pub fn align_pairs(old: &[CodeCommentPair], new: &[CodeCommentPair]) -> Vec<AlignedPair> {
    align_pairs_with(old, new, &AlignConfig::default())
}

pub fn align_pairs_with(
    old: &[CodeCommentPair],
    new: &[CodeCommentPair],
    config: &AlignConfig,
) -> Vec<AlignedPair> {
    let of_kind = |pairs: &[CodeCommentPair], kind| -> Vec<usize> {
        (0..pairs.len()).filter(|&i| pairs[i].kind == kind).collect()
    };
    let (om, nm) = (of_kind(old, PairKind::Method), of_kind(new, PairKind::Method));
    let (ob, nb) = (of_kind(old, PairKind::Block), of_kind(new, PairKind::Block));

    let mut used_old = vec![false; old.len()];
    let mut used_new = vec![false; new.len()];
    let mut matches: Vec<(f64, usize, usize)> = Vec::new();

    // Methods: signature, then name, then body similarity.
    let old_bodies: Vec<Vec<String>> = old.iter().map(body_tokens).collect();
    let new_bodies: Vec<Vec<String>> = new.iter().map(body_tokens).collect();
    let tiers: [&dyn Fn(usize, usize) -> Option<f64>; 3] = [
        &|i, j| (old[i].enclosing_method_signature == new[j].enclosing_method_signature).then_some(1.0),
        &|i, j| {
            (old[i].method_name() == new[j].method_name())
                .then(|| token_dice(&old_bodies[i], &new_bodies[j]))
        },
        &|i, j| {
            let s = token_dice(&old_bodies[i], &new_bodies[j]);
            (s >= config.method_body_threshold).then_some(s)
        },
    ];
    for tier in tiers {
        let mut cands = Vec::new();
        for (a, &i) in om.iter().enumerate() {
            for (b, &j) in nm.iter().enumerate() {
                if used_old[i] || used_new[j] {
                    continue;
                }
                if let Some(s) = tier(i, j) {
                    cands.push((s, a, b));
                }
            }
        }
        let mut uo: Vec<bool> = om.iter().map(|&i| used_old[i]).collect();
        let mut un: Vec<bool> = nm.iter().map(|&j| used_new[j]).collect();
        for (s, a, b) in assign(cands, &mut uo, &mut un) {
            used_old[om[a]] = true;
            used_new[nm[b]] = true;
            matches.push((s, om[a], nm[b]));
        }
    }

    // Methods known to correspond, from signatures and aligned method pairs.
    let corresponding = |i: usize, j: usize| -> bool {
        let (a, b) = (&old[i], &new[j]);
        if a.enclosing_method_signature == b.enclosing_method_signature
            || a.method_name() == b.method_name()
        {
            return true;
        }
        matches.iter().any(|&(_, x, y)| {
            old[x].enclosing_method_signature == a.enclosing_method_signature
                && new[y].enclosing_method_signature == b.enclosing_method_signature
        })
    };
    let mut cands = Vec::new();
    for (a, &i) in ob.iter().enumerate() {
        for (b, &j) in nb.iter().enumerate() {
            if !corresponding(i, j) {
                continue;
            }
            let s = bigram_dice(&old[i].comment_body(), &new[j].comment_body());
            if s >= config.block_comment_threshold {
                cands.push((s, a, b));
            }
        }
    }
    let mut uo = vec![false; ob.len()];
    let mut un = vec![false; nb.len()];
    for (s, a, b) in assign(cands, &mut uo, &mut un) {
        used_old[ob[a]] = true;
        used_new[nb[b]] = true;
        matches.push((s, ob[a], nb[b]));
    }

    matches.sort_by_key(|&(_, i, _)| i);
    let mut out: Vec<AlignedPair> = matches
        .into_iter()
        .map(|(s, i, j)| AlignedPair {
            old: Some(old[i].clone()),
            new: Some(new[j].clone()),
            match_score: s,
        })
        .collect();
    for p in old.iter().enumerate().filter(|(i, _)| !used_old[*i]).map(|(_, p)| p) {
        out.push(AlignedPair {
            old: Some(p.clone()),
            new: None,
            match_score: 0.0,
        });
    }
    for p in new.iter().enumerate().filter(|(j, _)| !used_new[*j]).map(|(_, p)| p) {
        out.push(AlignedPair {
            old: None,
            new: Some(p.clone()),
            match_score: 0.0,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distiller::parser::{parse, GrammarId};

    const SERNO: &str = "\
public class SernoConfig {
    /**
     * Configures the serial number size.
     */
    public void configure(boolean compact) {
        //Default serno size 8 bytes(64bits)
        setSernoOctetSize(8);
        if (compact) {
            //Set serno size 4 bytes(32 bits)
            setSernoOctetSize(4);
        }
    }
}
";

    fn pairs(src: &str) -> (Vec<CodeCommentPair>, Vec<CodeCommentPair>) {
        let tree = parse(src, GrammarId::CurlyBrace).unwrap();
        (extract_method_pairs(src, &tree), extract_block_pairs(src, &tree))
    }

    fn lines(p: &CodeCommentPair) -> Vec<usize> {
        p.code_lines.iter().map(|(n, _)| *n).collect()
    }

    #[test]
    fn nested_comment_does_not_end_outer_scope() {
        let (_, blocks) = pairs(SERNO);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].comment_text, "//Default serno size 8 bytes(64bits)");
        assert_eq!(blocks[0].comment_span, LineSpan::new(6, 6));
        assert_eq!(lines(&blocks[0]), vec![7, 8, 10, 11]);
        assert_eq!(blocks[1].comment_span, LineSpan::new(9, 9));
        assert_eq!(blocks[1].code_lines, vec![(10, "setSernoOctetSize(4);".to_string())]);
        assert_eq!(blocks[1].enclosing_method_signature.as_deref(), Some("configure(boolean)"));
        assert_eq!(blocks[1].enclosing_class.as_deref(), Some("SernoConfig"));
    }

    #[test]
    fn method_pair_drops_interior_comments() {
        let (methods, _) = pairs(SERNO);
        assert_eq!(methods.len(), 1);
        let m = &methods[0];
        assert_eq!(m.kind, PairKind::Method);
        assert_eq!(m.comment_span, LineSpan::new(2, 4));
        assert_eq!(lines(m), vec![7, 8, 10, 11]);
        assert!(!m.code_text().contains("//"));
    }

    #[test]
    fn adjacent_comments_merge() {
        let src = "class A {\n  void f() {\n    // one\n    // two\n    a();\n    b();\n    c();\n  }\n}\n";
        let (_, blocks) = pairs(src);
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].comment_text, "// one\n// two");
        assert_eq!(blocks[0].comment_body(), "one two");
        assert_eq!(lines(&blocks[0]), vec![5, 6, 7]);
    }

    #[test]
    fn next_comment_ends_scope() {
        let src = "class A {\n  void f() {\n    // one\n    a();\n    b();\n    // two\n    c();\n    d();\n  }\n}\n";
        let (_, blocks) = pairs(src);
        assert_eq!(blocks.len(), 2);
        assert_eq!(lines(&blocks[0]), vec![4, 5]);
        assert_eq!(lines(&blocks[1]), vec![7, 8]);
    }

    #[test]
    fn scopeless_and_trailing_comments_are_skipped() {
        let src = "class A {\n  void f() {\n    a(); // trailing\n    // dangling\n  }\n}\n";
        let (_, blocks) = pairs(src);
        assert!(blocks.is_empty());
    }

    #[test]
    fn undocumented_methods_are_skipped() {
        let src = "\
class A {
    /** a */
    int a() { return 1; }
    // b
    @Override
    public String b() { return \"\"; }
    void c() { }
    /** d */
    void d() { }
}
";
        let (methods, _) = pairs(src);
        let sigs: Vec<&str> = methods.iter().map(|m| m.enclosing_method_signature.as_deref().unwrap()).collect();
        assert_eq!(sigs, vec!["a()", "b()", "d()"]);
        assert!(methods[2].code_lines.is_empty());
        assert_eq!(methods[0].code_lines, vec![(3, "return 1;".to_string())]);
    }

    #[test]
    fn comment_body_normalization() {
        assert_eq!(comment_body("/* set size */"), "set size");
        assert_eq!(comment_body("//  set   size"), "set size");
        assert_eq!(comment_body("/**\n * Set it.\n * @return x\n */"), "Set it. @return x");
    }

    #[test]
    fn identical_files_align_with_score_one() {
        let (m, b) = pairs(SERNO);
        let all: Vec<CodeCommentPair> = m.into_iter().chain(b).collect();
        let aligned = align_pairs(&all, &all);
        assert_eq!(aligned.len(), 3);
        assert!(aligned.iter().all(|a| a.is_matched() && a.match_score == 1.0));
    }

    #[test]
    fn renamed_method_aligns_by_body() {
        let old = "class A {\n  /** Sum. */\n  int total(int a, int b) {\n    int s = a + b;\n    log(s);\n    return s;\n  }\n}\n";
        let new = "class A {\n  /** Sum. */\n  int sum(int a, int b) {\n    int s = a + b;\n    log(s);\n    return s;\n  }\n}\n";
        let (a, _) = pairs(old);
        let (b, _) = pairs(new);
        let aligned = align_pairs(&a, &b);
        assert_eq!(aligned.len(), 1);
        assert!(aligned[0].is_matched());
        // Identical bodies: token multiset Dice is exactly 1.
        assert_eq!(aligned[0].match_score, 1.0);
    }

    #[test]
    fn deleted_method_is_one_sided() {
        let old = "class A {\n  /** a */\n  void a() { x(); }\n  /** b */\n  void b() { y(); }\n}\n";
        let new = "class A {\n  /** a */\n  void a() { x(); }\n}\n";
        let (a, _) = pairs(old);
        let (b, _) = pairs(new);
        let aligned = align_pairs(&a, &b);
        assert_eq!(aligned.len(), 2);
        assert!(aligned[0].is_matched());
        assert!(aligned[1].new.is_none());
        assert_eq!(aligned[1].old.as_ref().unwrap().method_name(), Some("b"));
    }
}
