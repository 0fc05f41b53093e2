//! Refactoring detection over a change script.

use serde::{Deserialize, Serialize};

use crate::distiller::decl::{DeclChange, DeclContext};
use crate::distiller::diff::{Action, ChangeOp};
use crate::distiller::lexer::token_texts;
use crate::distiller::tree::{MethodDecl, StatementKind, SyntaxTree};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefactoringFlags {
    pub extract_method: bool,
    pub inline_method: bool,
    pub rename_method: bool,
    pub add_parameter: bool,
    pub remove_parameter: bool,
    pub inline_temp: bool,
    pub encapsulate_field: bool,
    pub introduce_assertion: bool,
}

impl RefactoringFlags {
    pub const NAMES: [&'static str; 8] = [
        "extract_method",
        "inline_method",
        "rename_method",
        "add_parameter",
        "remove_parameter",
        "inline_temp",
        "encapsulate_field",
        "introduce_assertion",
    ];

    pub fn values(&self) -> [bool; 8] {
        [
            self.extract_method,
            self.inline_method,
            self.rename_method,
            self.add_parameter,
            self.remove_parameter,
            self.inline_temp,
            self.encapsulate_field,
            self.introduce_assertion,
        ]
    }
}

/// One side of a change: the whole-file tree and the declarations around the
/// changed pair.
#[derive(Debug, Clone, Copy)]
pub struct Revision<'a> {
    pub tree: &'a SyntaxTree,
    pub context: &'a DeclContext,
}

const NOT_CALLS: &[&str] = &[
    "if", "while", "for", "switch", "catch", "synchronized", "return", "throw", "assert", "super",
    "this",
];

/// `(name, argument count)` for every call in a token sequence.
fn calls(tokens: &[String]) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for i in 0..tokens.len().saturating_sub(1) {
        let t = &tokens[i];
        let ident = t.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$');
        if !ident || tokens[i + 1] != "(" || NOT_CALLS.contains(&t.as_str()) {
            continue;
        }
        if i > 0 && tokens[i - 1] == "new" {
            continue;
        }
        let mut depth = 0usize;
        let mut args = 0usize;
        let mut empty = true;
        for tok in &tokens[i + 1..] {
            match tok.as_str() {
                "(" | "[" | "{" => {
                    depth += 1;
                    if depth > 1 {
                        empty = false;
                    }
                }
                ")" | "]" | "}" => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                "," if depth == 1 => args += 1,
                _ => empty = false,
            }
        }
        out.push((t.clone(), if empty { 0 } else { args + 1 }));
    }
    out
}

fn op_tokens(text: Option<&String>) -> Vec<String> {
    text.map(|t| token_texts(t)).unwrap_or_default()
}

/// Tokens that carry no content once statements are compared in isolation.
fn strip_structure(tokens: impl IntoIterator<Item = String>) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !matches!(t.as_str(), "{" | "}" | "else" | "finally"))
        .collect()
}

fn method_body(tree: &SyntaxTree, m: &MethodDecl) -> Vec<String> {
    strip_structure(tree.body_tokens(m.node).iter().map(|t| t.text.clone()))
}

/// Maximal runs of ops with `action`, as index ranges.
fn runs(ops: &[ChangeOp], action: Action) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < ops.len() {
        if ops[i].action != action {
            i += 1;
            continue;
        }
        let start = i;
        while i < ops.len() && ops[i].action == action {
            i += 1;
        }
        out.push(start..i);
    }
    out
}

/// Shared core of extract/inline detection. `run_action` is the side whose
/// statements moved into (or out of) a method; `call_action` is the side that
/// gained (or lost) the invocation; `lookup` holds the moved method.
fn moved_body(ops: &[ChangeOp], run_action: Action, call_action: Action, lookup: &SyntaxTree) -> bool {
    for run in runs(ops, run_action) {
        let moved = strip_structure(run.clone().flat_map(|k| {
            let op = &ops[k];
            op_tokens(op.old_text.as_ref().or(op.new_text.as_ref()))
        }));
        if moved.is_empty() {
            continue;
        }
        let neighbours = [run.end, run.start.wrapping_sub(1)];
        for n in neighbours {
            let Some(op) = ops.get(n) else {
                continue;
            };
            if op.action != call_action {
                continue;
            }
            let text = match call_action {
                Action::Add => op.new_text.as_ref(),
                _ => op.old_text.as_ref(),
            };
            let invoked = calls(&op_tokens(text));
            if op.kind != StatementKind::MethodInvocation && invoked.is_empty() {
                continue;
            }
            for (name, argc) in invoked {
                let hit = lookup
                    .methods_named(&name)
                    .filter(|m| m.params.len() == argc)
                    .any(|m| method_body(lookup, m) == moved);
                if hit {
                    return true;
                }
            }
        }
    }
    false
}

/// A run of deleted statements next to an added call whose target, present in
/// the new tree, has exactly those statements as its body.
pub fn detect_extract_method(ops: &[ChangeOp], _old_tree: &SyntaxTree, new_tree: &SyntaxTree) -> bool {
    moved_body(ops, Action::Delete, Action::Add, new_tree)
}

/// Mirror of [`detect_extract_method`]: a deleted call next to a run of added
/// statements equal to the body of the called method in the old tree.
pub fn detect_inline_method(ops: &[ChangeOp], old_tree: &SyntaxTree, _new_tree: &SyntaxTree) -> bool {
    moved_body(ops, Action::Add, Action::Delete, old_tree)
}

/// `(entity, expression)` for `x = expr;` or `T x = expr;`.
fn assigned(tokens: &[String]) -> Option<(String, Vec<String>)> {
    let mut depth = 0i32;
    let mut eq = None;
    for (i, t) in tokens.iter().enumerate() {
        match t.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            "=" if depth == 0 => {
                eq = Some(i);
                break;
            }
            _ => {}
        }
    }
    let eq = eq?;
    let entity = tokens[..eq].last()?.clone();
    if !entity.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$') {
        return None;
    }
    let mut expr: Vec<String> = tokens[eq + 1..].to_vec();
    if expr.last().is_some_and(|t| t == ";") {
        expr.pop();
    }
    (!expr.is_empty()).then_some((entity, expr))
}

fn substitute(tokens: &[String], entity: &str, replacement: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let member = i > 0 && tokens[i - 1] == ".";
        if t == entity && !member {
            out.extend_from_slice(replacement);
        } else {
            out.push(t.clone());
        }
    }
    out
}

/// A deleted assignment `e = expr` followed by an update that replaced `e`
/// with `expr`.
pub fn detect_inline_temp(ops: &[ChangeOp]) -> bool {
    for (i, op) in ops.iter().enumerate() {
        let assignment = matches!(
            op.kind,
            StatementKind::Assignment | StatementKind::VariableDeclaration
        );
        if op.action != Action::Delete || !assignment {
            continue;
        }
        let Some((entity, expr)) = assigned(&op_tokens(op.old_text.as_ref())) else {
            continue;
        };
        let mut wrapped = vec!["(".to_string()];
        wrapped.extend(expr.iter().cloned());
        wrapped.push(")".to_string());
        for later in &ops[i..] {
            if later.action != Action::Update {
                continue;
            }
            let before = op_tokens(later.old_text.as_ref());
            if !before.contains(&entity) {
                continue;
            }
            let after = op_tokens(later.new_text.as_ref());
            if substitute(&before, &entity, &expr) == after
                || substitute(&before, &entity, &wrapped) == after
            {
                return true;
            }
        }
    }
    false
}

fn capitalized(name: &str) -> String {
    let mut c = name.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn is_assertion(op: &ChangeOp) -> bool {
    let toks = op_tokens(op.new_text.as_ref());
    if toks.first().is_some_and(|t| t == "assert") {
        return true;
    }
    calls(&toks).iter().any(|(name, _)| {
        let lower = name.to_lowercase();
        lower.starts_with("assert") || lower.starts_with("checkargument") || lower.starts_with("checkstate")
    })
}

/// Rename, parameter, encapsulation and assertion refactorings.
pub fn detect_simple_refactorings(
    ops: &[ChangeOp],
    old: Revision<'_>,
    new: Revision<'_>,
    decl: &DeclChange,
) -> RefactoringFlags {
    let mut flags = RefactoringFlags::default();
    if let (Some(a), Some(b)) = (&old.context.method, &new.context.method) {
        let count = |r: &Revision<'_>, m: &MethodDecl| r.tree.statements_under(m.node).len();
        flags.rename_method = a.name != b.name
            && a.params.len() == b.params.len()
            && count(&old, a) == count(&new, b);
        if a.name == b.name && decl.parameters_changed {
            flags.add_parameter = b.params.len() > a.params.len();
            flags.remove_parameter = b.params.len() < a.params.len();
        }
    }

    let has = |list: &[String], m: &str| list.iter().any(|x| x == m);
    for field in &old.context.fields {
        if !has(&field.modifiers, "public") {
            continue;
        }
        for name in &field.names {
            let now_private = new
                .context
                .fields
                .iter()
                .any(|f| f.names.contains(name) && has(&f.modifiers, "private"));
            if !now_private {
                continue;
            }
            let cap = capitalized(name);
            let accessors = [format!("get{cap}"), format!("set{cap}"), format!("is{cap}")];
            let class = &field.class;
            let added = accessors.iter().any(|acc| {
                new.tree.methods.iter().any(|m| &m.name == acc && &m.class == class)
                    && !old.tree.methods.iter().any(|m| &m.name == acc && &m.class == class)
            });
            flags.encapsulate_field |= added;
        }
    }

    flags.introduce_assertion = ops
        .iter()
        .any(|op| op.action == Action::Add && is_assertion(op));
    flags
}

pub fn detect_refactorings(
    ops: &[ChangeOp],
    old: Revision<'_>,
    new: Revision<'_>,
    decl: &DeclChange,
) -> RefactoringFlags {
    let mut flags = detect_simple_refactorings(ops, old, new, decl);
    flags.extract_method = detect_extract_method(ops, old.tree, new.tree);
    flags.inline_method = detect_inline_method(ops, old.tree, new.tree);
    flags.inline_temp = detect_inline_temp(ops);
    flags
}
