//! Parsing, tree differencing and declaration comparison.

pub mod decl;
pub mod diff;
pub mod lexer;
pub mod parser;
pub mod tree;

pub use decl::{decl_changes, DeclChange, DeclContext};
pub use diff::{count_changes, diff, diff_with, Action, ChangeOp, DiffConfig, DiffResult};
pub use parser::{parse, parse_fragment, GrammarId};
pub use tree::{LineSpan, NodeId, NodeKind, StatementKind, SyntaxTree};
