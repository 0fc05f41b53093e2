//! Statement-level tree differencing.
//!
//! Children of matched parents are paired greedily by descending similarity
//! of their normalized text (same node kind required). Matching recurses only
//! into matched pairs, so a removed compound statement yields a delete for
//! itself and for every statement inside it. Control and terminal statements
//! left over after the similarity pass are paired by position.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::tree::{LineSpan, NodeId, NodeKind, StatementKind, SyntaxTree};
use crate::text::bigram_dice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Delete,
    Update,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Add, Action::Delete, Action::Update];

    pub fn name(self) -> &'static str {
        match self {
            Action::Add => "add",
            Action::Delete => "delete",
            Action::Update => "update",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeOp {
    pub action: Action,
    pub kind: StatementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub old_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub old_span: Option<LineSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_span: Option<LineSpan>,
}

impl ChangeOp {
    pub fn add(kind: StatementKind, text: &str, span: LineSpan) -> Self {
        ChangeOp {
            action: Action::Add,
            kind,
            old_text: None,
            new_text: Some(text.to_string()),
            old_span: None,
            new_span: Some(span),
        }
    }

    pub fn delete(kind: StatementKind, text: &str, span: LineSpan) -> Self {
        ChangeOp {
            action: Action::Delete,
            kind,
            old_text: Some(text.to_string()),
            new_text: None,
            old_span: Some(span),
            new_span: None,
        }
    }

    pub fn update(
        kind: StatementKind,
        old_text: &str,
        new_text: &str,
        old_span: LineSpan,
        new_span: LineSpan,
    ) -> Self {
        ChangeOp {
            action: Action::Update,
            kind,
            old_text: Some(old_text.to_string()),
            new_text: Some(new_text.to_string()),
            old_span: Some(old_span),
            new_span: Some(new_span),
        }
    }

    /// The op with old and new sides exchanged.
    pub fn inverted(&self) -> ChangeOp {
        let action = match self.action {
            Action::Add => Action::Delete,
            Action::Delete => Action::Add,
            Action::Update => Action::Update,
        };
        ChangeOp {
            action,
            kind: self.kind,
            old_text: self.new_text.clone(),
            new_text: self.old_text.clone(),
            old_span: self.new_span,
            new_span: self.old_span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffConfig {
    pub similarity_threshold: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            similarity_threshold: 0.6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiffResult {
    pub ops: Vec<ChangeOp>,
    /// Matched (old, new) node pairs, structural nodes included.
    pub matched: Vec<(NodeId, NodeId)>,
}

pub fn diff(old: &SyntaxTree, new: &SyntaxTree) -> Vec<ChangeOp> {
    diff_with(old, new, &DiffConfig::default()).ops
}

pub fn count_changes(ops: &[ChangeOp]) -> usize {
    ops.len()
}

pub fn diff_with(old: &SyntaxTree, new: &SyntaxTree, config: &DiffConfig) -> DiffResult {
    let mut matched = Vec::new();
    match_children(old, new, SyntaxTree::ROOT, SyntaxTree::ROOT, config, &mut matched);

    let old_order = preorder_index(old);
    let new_order = preorder_index(new);
    let old_to_new: HashMap<NodeId, NodeId> = matched.iter().copied().collect();
    let new_matched: HashSet<NodeId> = matched.iter().map(|&(_, n)| n).collect();

    // (sort key, op)
    let mut keyed: Vec<((usize, usize), ChangeOp)> = Vec::new();
    for id in old.statements() {
        let node = old.node(id);
        let kind = node.kind.statement().expect("statement");
        match old_to_new.get(&id) {
            None => keyed.push((
                (2 * old_order[&id] + 1, 0),
                ChangeOp::delete(kind, &node.text, node.header_span),
            )),
            Some(&n) if new.node(n).text != node.text => keyed.push((
                (2 * old_order[&id] + 1, new_order[&n] + 1),
                ChangeOp::update(
                    kind,
                    &node.text,
                    &new.node(n).text,
                    node.header_span,
                    new.node(n).header_span,
                ),
            )),
            Some(_) => {}
        }
    }

    // Adds sort just before the old position of the next matched node.
    let new_pre = new.descendants(SyntaxTree::ROOT);
    let new_to_old: HashMap<NodeId, NodeId> = matched.iter().map(|&(o, n)| (n, o)).collect();
    let tail = 2 * old_order.len() + 2;
    for (k, &id) in new_pre.iter().enumerate() {
        let node = new.node(id);
        let Some(kind) = node.kind.statement() else {
            continue;
        };
        if new_matched.contains(&id) {
            continue;
        }
        let anchor = new_pre[k + 1..]
            .iter()
            .find_map(|n| new_to_old.get(n))
            .map_or(tail, |o| 2 * old_order[o]);
        keyed.push((
            (anchor, new_order[&id] + 1),
            ChangeOp::add(kind, &node.text, node.header_span),
        ));
    }

    keyed.sort_by_key(|(key, _)| *key);
    DiffResult {
        ops: keyed.into_iter().map(|(_, op)| op).collect(),
        matched,
    }
}

fn preorder_index(tree: &SyntaxTree) -> HashMap<NodeId, usize> {
    tree.descendants(SyntaxTree::ROOT)
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect()
}

fn match_children(
    old: &SyntaxTree,
    new: &SyntaxTree,
    old_parent: NodeId,
    new_parent: NodeId,
    config: &DiffConfig,
    matched: &mut Vec<(NodeId, NodeId)>,
) {
    let oc = &old.node(old_parent).children;
    let nc = &new.node(new_parent).children;
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &o) in oc.iter().enumerate() {
        for (j, &n) in nc.iter().enumerate() {
            let (a, b) = (old.node(o), new.node(n));
            if a.kind != b.kind {
                continue;
            }
            let sim = bigram_dice(&a.text, &b.text);
            if sim >= config.similarity_threshold {
                candidates.push((sim, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    let mut used_old = vec![false; oc.len()];
    let mut used_new = vec![false; nc.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if used_old[i] || used_new[j] {
            continue;
        }
        used_old[i] = true;
        used_new[j] = true;
        pairs.push((oc[i], nc[j]));
    }
    pairs.extend(positional_pairs(old, new, oc, nc, &used_old, &used_new));
    pairs.sort();
    for (o, n) in pairs {
        matched.push((o, n));
        match_children(old, new, o, n, config, matched);
    }
}

/// Kinds whose identity follows from position: a return or a condition in
/// the same place is the same statement even when its text changed a lot.
fn positional(kind: NodeKind) -> bool {
    matches!(
        kind.statement(),
        Some(
            StatementKind::If
                | StatementKind::ElseIf
                | StatementKind::For
                | StatementKind::While
                | StatementKind::Catch
                | StatementKind::Try
                | StatementKind::Throw
                | StatementKind::Return
        )
    )
}

/// Second pass over children left unmatched: an old and a new child of a
/// positional kind are paired when each is the only one of its kind in the
/// same gap between matched siblings.
fn positional_pairs(
    old: &SyntaxTree,
    new: &SyntaxTree,
    oc: &[NodeId],
    nc: &[NodeId],
    used_old: &[bool],
    used_new: &[bool],
) -> Vec<(NodeId, NodeId)> {
    let gaps = |tree: &SyntaxTree, ids: &[NodeId], used: &[bool]| {
        let mut gap = 0usize;
        let mut out: HashMap<(usize, NodeKind), Vec<NodeId>> = HashMap::new();
        for (k, &id) in ids.iter().enumerate() {
            if used[k] {
                gap += 1;
                continue;
            }
            let kind = tree.node(id).kind;
            if positional(kind) {
                out.entry((gap, kind)).or_default().push(id);
            }
        }
        out
    };
    let (og, ng) = (gaps(old, oc, used_old), gaps(new, nc, used_new));
    let mut out = Vec::new();
    for (key, o) in &og {
        if let Some(n) = ng.get(key) {
            if o.len() == 1 && n.len() == 1 {
                out.push((o[0], n[0]));
            }
        }
    }
    out
}

/// Writes one JSON-encoded op per line.
pub fn write_change_script<W: Write>(ops: &[ChangeOp], mut out: W) -> io::Result<()> {
    for op in ops {
        serde_json::to_writer(&mut out, op)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distiller::parser::{parse_fragment, GrammarId};

    fn frag(src: &str) -> SyntaxTree {
        let lines: Vec<(usize, String)> = src
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.to_string()))
            .collect();
        parse_fragment(&lines, GrammarId::CurlyBrace).unwrap()
    }

    #[test]
    fn identical_trees_have_no_ops() {
        let t = frag("int a = 1;\nwhile (a < 3) {\n  a++;\n}\nreturn a;");
        assert!(diff(&t, &t).is_empty());
    }

    #[test]
    fn literal_change_is_an_update() {
        let ops = diff(&frag("setSernoOctetSize(8);"), &frag("setSernoOctetSize(4);"));
        assert_eq!(ops.len(), 1);
        assert_eq!(ops[0].action, Action::Update);
        assert_eq!(ops[0].kind, StatementKind::MethodInvocation);
        assert_eq!(count_changes(&ops), 1);
    }

    #[test]
    fn removed_loop_deletes_interior() {
        let old = frag("init();\nwhile (more()) {\n  int x = next();\n  use(x);\n}\ndone();");
        let new = frag("init();\ndone();");
        let ops = diff(&old, &new);
        let got: Vec<(Action, StatementKind)> = ops.iter().map(|o| (o.action, o.kind)).collect();
        assert_eq!(
            got,
            vec![
                (Action::Delete, StatementKind::While),
                (Action::Delete, StatementKind::VariableDeclaration),
                (Action::Delete, StatementKind::MethodInvocation),
            ]
        );
        assert_eq!(ops[0].old_span, Some(LineSpan::new(2, 2)));
    }

    #[test]
    fn adds_are_placed_after_preceding_deletes() {
        let old = frag("a();\nx = 1;\ny = 2;\nb();");
        let new = frag("a();\nhelper();\nb();");
        let ops = diff(&old, &new);
        let got: Vec<Action> = ops.iter().map(|o| o.action).collect();
        assert_eq!(got, vec![Action::Delete, Action::Delete, Action::Add]);
    }

    #[test]
    fn inverted_swaps_sides() {
        let op = ChangeOp::delete(StatementKind::Return, "return x ;", LineSpan::new(3, 3));
        let inv = op.inverted();
        assert_eq!(inv.action, Action::Add);
        assert_eq!(inv.new_text.as_deref(), Some("return x ;"));
        assert_eq!(inv.inverted(), op);
    }

    #[test]
    fn change_script_is_one_json_object_per_line() {
        let ops = vec![
            ChangeOp::add(StatementKind::If, "if ( x )", LineSpan::new(1, 1)),
            ChangeOp::delete(StatementKind::Throw, "throw e ;", LineSpan::new(2, 2)),
        ];
        let mut buf = Vec::new();
        write_change_script(&ops, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let back: ChangeOp = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(back, ops[1]);
        assert!(lines[0].contains("\"action\":\"add\""));
        assert!(lines[0].contains("\"kind\":\"IF\""));
    }
}
