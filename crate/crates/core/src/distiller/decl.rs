//! Declaration-level changes around a method.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::diff::ChangeOp;
use super::lexer::token_texts;
use super::tree::{FieldDecl, MethodDecl, SyntaxTree};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclChange {
    pub method_name_changed: bool,
    pub return_type_changed: bool,
    pub parameters_changed: bool,
    pub class_attributes_changed: bool,
}

impl DeclChange {
    pub fn any(&self) -> bool {
        self.method_name_changed
            || self.return_type_changed
            || self.parameters_changed
            || self.class_attributes_changed
    }
}

/// The method enclosing a pair and the fields of its class.
#[derive(Debug, Clone, Default)]
pub struct DeclContext {
    pub method: Option<MethodDecl>,
    pub fields: Vec<FieldDecl>,
}

impl DeclContext {
    pub fn for_method(tree: &SyntaxTree, method: Option<&MethodDecl>) -> Self {
        let fields = match method {
            Some(m) => tree
                .fields
                .iter()
                .filter(|f| f.class == m.class)
                .cloned()
                .collect(),
            None => Vec::new(),
        };
        DeclContext {
            method: method.cloned(),
            fields,
        }
    }
}

fn field_index(fields: &[FieldDecl]) -> HashMap<&str, (&[String], &str, &str)> {
    let mut out = HashMap::new();
    for f in fields {
        for name in &f.names {
            out.insert(name.as_str(), (f.modifiers.as_slice(), f.ty.as_str(), f.text.as_str()));
        }
    }
    out
}

/// Compares the declarations of two revisions. A class attribute counts only
/// when its declaration changed and its name occurs in the changed code.
pub fn decl_changes(old: &DeclContext, new: &DeclContext, ops: &[ChangeOp]) -> DeclChange {
    let mut change = DeclChange::default();
    if let (Some(a), Some(b)) = (&old.method, &new.method) {
        change.method_name_changed = a.name != b.name;
        change.return_type_changed = a.return_type != b.return_type;
        change.parameters_changed = a.params != b.params;
    }

    let (fo, fnew) = (field_index(&old.fields), field_index(&new.fields));
    let names: BTreeSet<&str> = fo.keys().chain(fnew.keys()).copied().collect();
    let changed: Vec<&str> = names
        .into_iter()
        .filter(|n| fo.get(n) != fnew.get(n))
        .collect();
    if !changed.is_empty() {
        let mut used = BTreeSet::new();
        for op in ops {
            for text in [&op.old_text, &op.new_text].into_iter().flatten() {
                used.extend(token_texts(text));
            }
        }
        change.class_attributes_changed = changed.iter().any(|n| used.contains(*n));
    }
    change
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distiller::diff::diff;
    use crate::distiller::parser::{parse, GrammarId};

    fn ctx(src: &str) -> (SyntaxTree, DeclContext) {
        let tree = parse(src, GrammarId::CurlyBrace).unwrap();
        let m = tree.methods.first().cloned();
        let c = DeclContext::for_method(&tree, m.as_ref());
        (tree, c)
    }

    #[test]
    fn identical_declarations_change_nothing() {
        let src = "class A { int size; int get(int k) { return size + k; } }";
        let (_, a) = ctx(src);
        let (_, b) = ctx(src);
        assert_eq!(decl_changes(&a, &b, &[]), DeclChange::default());
    }

    #[test]
    fn signature_parts_are_detected() {
        let (_, a) = ctx("class A { int get(int k) { return k; } }");
        let (_, b) = ctx("class A { long fetch(int k, int j) { return k; } }");
        let c = decl_changes(&a, &b, &[]);
        assert!(c.method_name_changed && c.return_type_changed && c.parameters_changed);
        assert!(!c.class_attributes_changed);
    }

    #[test]
    fn renamed_parameter_counts_as_parameter_change() {
        let (_, a) = ctx("class A { void f(int k) { } }");
        let (_, b) = ctx("class A { void f(int j) { } }");
        assert!(decl_changes(&a, &b, &[]).parameters_changed);
    }

    #[test]
    fn field_change_needs_use_in_changed_code() {
        let (ta, a) = ctx("class A { int size = 8; void f() { use(size); other(); } }");
        let (tb, b) = ctx("class A { int octets = 8; void f() { use(octets); other(); } }");
        let ops = diff(&ta, &tb);
        assert!(decl_changes(&a, &b, &ops).class_attributes_changed);

        let (tc, c) = ctx("class A { int size = 8; int unused; void f() { other(); } }");
        let (td, d) = ctx("class A { int size = 8; long unused; void f() { other(); } }");
        let ops = diff(&tc, &td);
        assert!(!decl_changes(&c, &d, &ops).class_attributes_changed);
    }
}
