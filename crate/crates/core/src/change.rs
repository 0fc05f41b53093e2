//! Assembly of a labeled pair change from two aligned pairs.

use serde::{Deserialize, Serialize};

use crate::distiller::decl::{decl_changes, DeclChange, DeclContext};
use crate::distiller::diff::{diff, ChangeOp};
use crate::distiller::parser::{parse_fragment, GrammarId};
use crate::distiller::tree::{MethodDecl, SyntaxTree};
use crate::error::Result;
use crate::linker::CodeCommentPair;
use crate::refactor::{detect_refactorings, RefactoringFlags, Revision};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairChange {
    pub old_pair: CodeCommentPair,
    pub new_pair: CodeCommentPair,
    pub ops: Vec<ChangeOp>,
    pub decl: DeclChange,
    pub refactorings: RefactoringFlags,
    pub label: u8,
}

/// Strips delimiters, collapses whitespace and trims. Case-sensitive.
pub fn normalize_comment(text: &str) -> String {
    crate::linker::comment_body(text)
}

/// 1 when the two comments differ after normalization.
pub fn label_pair(old_comment: &str, new_comment: &str) -> u8 {
    u8::from(normalize_comment(old_comment) != normalize_comment(new_comment))
}

fn find_method<'a>(tree: &'a SyntaxTree, pair: &'a CodeCommentPair) -> Option<&'a MethodDecl> {
    let sig = pair.enclosing_method_signature.as_deref()?;
    tree.method_by_key(sig).or_else(|| {
        let name = pair.method_name()?;
        let mut named = tree.methods_named(name);
        let first = named.next();
        // Ambiguous overloads stay unresolved.
        match named.next() {
            None => first,
            Some(_) => None,
        }
    })
}

/// Statement tree of a pair's code lines, with source line numbers.
pub fn pair_tree(pair: &CodeCommentPair, grammar: GrammarId) -> Result<SyntaxTree> {
    parse_fragment(&pair.code_lines, grammar)
}

/// Diffs the code of an aligned pair and collects declaration and
/// refactoring changes against the enclosing file trees.
pub fn build_pair_change(
    old_pair: &CodeCommentPair,
    new_pair: &CodeCommentPair,
    old_file: &SyntaxTree,
    new_file: &SyntaxTree,
    grammar: GrammarId,
) -> Result<PairChange> {
    let ops = diff(&pair_tree(old_pair, grammar)?, &pair_tree(new_pair, grammar)?);
    let old_ctx = DeclContext::for_method(old_file, find_method(old_file, old_pair));
    let new_ctx = DeclContext::for_method(new_file, find_method(new_file, new_pair));
    let decl = decl_changes(&old_ctx, &new_ctx, &ops);
    let refactorings = detect_refactorings(
        &ops,
        Revision {
            tree: old_file,
            context: &old_ctx,
        },
        Revision {
            tree: new_file,
            context: &new_ctx,
        },
        &decl,
    );
    Ok(PairChange {
        label: label_pair(&old_pair.comment_text, &new_pair.comment_text),
        old_pair: old_pair.clone(),
        new_pair: new_pair.clone(),
        ops,
        decl,
        refactorings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(label_pair("// set size", "// set size"), 0);
        assert_eq!(label_pair("// set size", "// set serno size"), 1);
        assert_eq!(label_pair("/* set size */", "//  set   size"), 0);
        assert_eq!(label_pair("// Set size", "// set size"), 1);
    }
}
