use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::lexer::{Comment, Token};

/// Statement taxonomy used for change classification.
///
/// The first nine kinds are the ones whose add/delete/update counts become
/// features. `Assignment` and `Return` exist for inline-temp detection and the
/// contains-return feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StatementKind {
    If,
    ElseIf,
    For,
    While,
    Catch,
    Try,
    Throw,
    MethodInvocation,
    VariableDeclaration,
    Assignment,
    Return,
    Other,
}

impl StatementKind {
    /// Kinds that carry per-action change counts.
    pub const COUNTED: [StatementKind; 9] = [
        StatementKind::If,
        StatementKind::ElseIf,
        StatementKind::For,
        StatementKind::While,
        StatementKind::Catch,
        StatementKind::Try,
        StatementKind::Throw,
        StatementKind::MethodInvocation,
        StatementKind::VariableDeclaration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatementKind::If => "if",
            StatementKind::ElseIf => "else_if",
            StatementKind::For => "for",
            StatementKind::While => "while",
            StatementKind::Catch => "catch",
            StatementKind::Try => "try",
            StatementKind::Throw => "throw",
            StatementKind::MethodInvocation => "method_invocation",
            StatementKind::VariableDeclaration => "variable_declaration",
            StatementKind::Assignment => "assignment",
            StatementKind::Return => "return",
            StatementKind::Other => "other",
        }
    }
}

impl fmt::Display for StatementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Nodes that organise statements but are not statements themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Structural {
    Root,
    Class,
    Method,
    Field,
    Block,
    Else,
    Finally,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Statement(StatementKind),
    Structural(Structural),
}

impl NodeKind {
    pub fn statement(self) -> Option<StatementKind> {
        match self {
            NodeKind::Statement(kind) => Some(kind),
            NodeKind::Structural(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineSpan {
    pub start: usize,
    pub end: usize,
}

impl LineSpan {
    pub fn new(start: usize, end: usize) -> Self {
        LineSpan { start, end }
    }

    pub fn lines(self) -> usize {
        self.end + 1 - self.start
    }

    pub fn contains(self, other: LineSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    /// Normalized header text: the node's own tokens joined by single spaces.
    /// Compound statements exclude their bodies.
    pub text: String,
    pub tokens: Range<usize>,
    /// Lines covered by the node including its body.
    pub span: LineSpan,
    /// Lines covered by the node's own tokens.
    pub header_span: LineSpan,
    pub depth: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Token indices of the `{` and `}` delimiting the body, when braced.
    pub body: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub ty: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub node: NodeId,
    pub name: String,
    pub modifiers: Vec<String>,
    pub return_type: String,
    pub params: Vec<Param>,
    pub class: Option<String>,
}

impl MethodDecl {
    /// `name(type, type)`; the key used to match methods across revisions.
    pub fn key(&self) -> String {
        let types: Vec<&str> = self.params.iter().map(|p| p.ty.as_str()).collect();
        format!("{}({})", self.name, types.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub node: NodeId,
    pub modifiers: Vec<String>,
    pub ty: String,
    pub names: Vec<String>,
    /// Declaration tokens, initializer included.
    pub text: String,
    pub class: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub node: NodeId,
    pub name: String,
}

/// A comment attached to the tree as an annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachedComment {
    pub comment: Comment,
    /// Innermost node whose braced body contains the comment.
    pub parent: NodeId,
    /// Number of `parent` children that end before the comment.
    pub index: usize,
    /// The comment sits inside a child statement rather than between children.
    pub inside_statement: bool,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct SyntaxTree {
    pub tokens: Vec<Token>,
    pub nodes: Vec<Node>,
    pub comments: Vec<AttachedComment>,
    pub methods: Vec<MethodDecl>,
    pub fields: Vec<FieldDecl>,
    pub classes: Vec<ClassDecl>,
    /// Maps lexed line numbers to original source line numbers.
    pub(crate) line_map: Option<Vec<usize>>,
}

impl SyntaxTree {
    pub const ROOT: NodeId = 0;

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> &Node {
        &self.nodes[Self::ROOT]
    }

    /// Pre-order traversal of the subtree below `id`, excluding `id`.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.nodes[id].children.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    /// Statement nodes of the subtree below `id`, in pre-order.
    pub fn statements_under(&self, id: NodeId) -> Vec<NodeId> {
        self.descendants(id)
            .into_iter()
            .filter(|&n| self.nodes[n].kind.statement().is_some())
            .collect()
    }

    pub fn statements(&self) -> Vec<NodeId> {
        self.statements_under(Self::ROOT)
    }

    pub fn method(&self, node: NodeId) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.node == node)
    }

    pub fn method_by_key(&self, key: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.key() == key)
    }

    pub fn methods_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a MethodDecl> + 'a {
        self.methods.iter().filter(move |m| m.name == name)
    }

    /// Innermost method containing `node`.
    pub fn enclosing_method(&self, node: NodeId) -> Option<&MethodDecl> {
        let mut cur = Some(node);
        while let Some(id) = cur {
            if let Some(m) = self.method(id) {
                return Some(m);
            }
            cur = self.nodes[id].parent;
        }
        None
    }

    pub fn enclosing_class(&self, node: NodeId) -> Option<&ClassDecl> {
        let mut cur = self.nodes[node].parent;
        while let Some(id) = cur {
            if let Some(c) = self.classes.iter().find(|c| c.node == id) {
                return Some(c);
            }
            cur = self.nodes[id].parent;
        }
        None
    }

    /// Tokens strictly inside the braces of a node's body.
    pub fn body_tokens(&self, node: NodeId) -> &[Token] {
        match self.nodes[node].body {
            Some((open, close)) => &self.tokens[open + 1..close],
            None => &[],
        }
    }

    pub fn token_texts(&self, range: Range<usize>) -> Vec<&str> {
        self.tokens[range].iter().map(|t| t.text.as_str()).collect()
    }

    /// Original source line for a line number seen by the lexer.
    pub fn source_line(&self, lexed_line: usize) -> usize {
        match &self.line_map {
            Some(map) => map.get(lexed_line - 1).copied().unwrap_or(lexed_line),
            None => lexed_line,
        }
    }

    pub fn source_span(&self, span: LineSpan) -> LineSpan {
        LineSpan::new(self.source_line(span.start), self.source_line(span.end))
    }

    /// Indented outline of the tree, one node per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in self.descendants(Self::ROOT) {
            let node = &self.nodes[id];
            let label = match node.kind {
                NodeKind::Statement(k) => k.name().to_uppercase(),
                NodeKind::Structural(s) => format!("{s:?}"),
            };
            out.push_str(&format!(
                "{}{} [{}-{}] {}\n",
                "  ".repeat(node.depth.saturating_sub(1)),
                label,
                node.span.start,
                node.span.end,
                node.text
            ));
        }
        out
    }
}
