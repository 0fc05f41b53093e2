//! Pragmatic recognizer for curly-brace object-oriented languages.
//!
//! It understands classes, methods, fields and the statement forms needed to
//! classify changes. Anything it does not recognize becomes an `Other`
//! statement rather than an error; only unbalanced delimiters are fatal.

use super::lexer::{lex, Lexed, Token};
use super::tree::*;
use crate::error::{Error, Result};

const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "default",
    "strictfp",
    "transient",
    "volatile",
    "sealed",
    "override",
    "virtual",
    "const",
    "export",
    "async",
];

const TYPE_KEYWORDS: &[&str] = &["class", "interface", "enum", "record", "struct", "namespace"];

/// A grammar turns source text into a [`SyntaxTree`].
pub trait Grammar: Sync {
    fn name(&self) -> &'static str;

    /// Parses a whole compilation unit.
    fn parse(&self, source: &str) -> Result<SyntaxTree>;

    /// Parses a statement sequence given as numbered source lines.
    fn parse_fragment(&self, lines: &[(usize, String)]) -> Result<SyntaxTree>;
}

/// Grammar shipped with the crate: Java, C#, and similar languages.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurlyBrace;

impl Grammar for CurlyBrace {
    fn name(&self) -> &'static str {
        "curly-brace"
    }

    fn parse(&self, source: &str) -> Result<SyntaxTree> {
        let lexed = lex(source)?;
        build(lexed, None, false)
    }

    fn parse_fragment(&self, lines: &[(usize, String)]) -> Result<SyntaxTree> {
        let text: Vec<&str> = lines.iter().map(|(_, l)| l.as_str()).collect();
        let lexed = lex(&text.join("\n"))?;
        let map = lines.iter().map(|(n, _)| *n).collect();
        build(lexed, Some(map), true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrammarId {
    #[default]
    CurlyBrace,
}

impl GrammarId {
    pub fn grammar(self) -> &'static dyn Grammar {
        match self {
            GrammarId::CurlyBrace => &CurlyBrace,
        }
    }

    pub fn for_extension(ext: &str) -> Option<GrammarId> {
        match ext.trim_start_matches('.') {
            "java" | "cs" | "kt" | "scala" | "groovy" | "c" | "h" | "cc" | "cpp" | "hpp"
            | "js" | "ts" | "swift" | "go" | "dart" => Some(GrammarId::CurlyBrace),
            _ => None,
        }
    }
}

pub fn parse(source: &str, grammar: GrammarId) -> Result<SyntaxTree> {
    grammar.grammar().parse(source)
}

pub fn parse_fragment(lines: &[(usize, String)], grammar: GrammarId) -> Result<SyntaxTree> {
    grammar.grammar().parse_fragment(lines)
}

fn build(lexed: Lexed, line_map: Option<Vec<usize>>, fragment: bool) -> Result<SyntaxTree> {
    let Lexed { tokens, comments } = lexed;
    let matching = match_delimiters(&tokens, line_map.as_deref())?;
    let mut p = Parser {
        toks: &tokens,
        matching,
        pos: 0,
        line_map: line_map.as_deref(),
        nodes: Vec::new(),
        methods: Vec::new(),
        fields: Vec::new(),
        classes: Vec::new(),
        class_stack: Vec::new(),
    };
    let end_line = tokens.last().map_or(1, |t| t.end_line);
    p.nodes.push(Node {
        kind: NodeKind::Structural(Structural::Root),
        text: String::new(),
        tokens: 0..tokens.len(),
        span: LineSpan::new(p.map(1), p.map(end_line)),
        header_span: LineSpan::new(p.map(1), p.map(1)),
        depth: 0,
        parent: None,
        children: Vec::new(),
        body: None,
    });
    if fragment {
        p.statements(SyntaxTree::ROOT, tokens.len());
    } else {
        p.members(SyntaxTree::ROOT, tokens.len());
    }
    let Parser {
        nodes,
        methods,
        fields,
        classes,
        ..
    } = p;
    let mut tree = SyntaxTree {
        tokens,
        nodes,
        comments: Vec::new(),
        methods,
        fields,
        classes,
        line_map,
    };
    tree.comments = comments
        .into_iter()
        .map(|c| attach_comment(&tree, c))
        .collect();
    Ok(tree)
}

fn attach_comment(tree: &SyntaxTree, comment: super::lexer::Comment) -> AttachedComment {
    let pos = comment.next_token;
    let parent = tree
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| matches!(n.body, Some((open, close)) if open < pos && pos <= close))
        .max_by_key(|(_, n)| n.depth)
        .map_or(SyntaxTree::ROOT, |(id, _)| id);
    let node = &tree.nodes[parent];
    let index = node
        .children
        .iter()
        .filter(|&&c| tree.nodes[c].tokens.end <= pos)
        .count();
    let inside_statement = node.children.iter().any(|&c| {
        let r = &tree.nodes[c].tokens;
        r.start < pos && pos < r.end
    });
    AttachedComment {
        comment,
        parent,
        index,
        inside_statement,
        depth: node.depth + 1,
    }
}

/// Index of the matching delimiter for every bracket token.
fn match_delimiters(tokens: &[Token], line_map: Option<&[usize]>) -> Result<Vec<usize>> {
    let line = |l: usize| line_map.and_then(|m| m.get(l - 1).copied()).unwrap_or(l);
    let mut matching = vec![usize::MAX; tokens.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let close_for = match t.text.as_str() {
            "(" | "[" | "{" => {
                stack.push(i);
                continue;
            }
            ")" => "(",
            "]" => "[",
            "}" => "{",
            _ => continue,
        };
        match stack.pop() {
            Some(open) if tokens[open].text == close_for => {
                matching[open] = i;
                matching[i] = open;
            }
            Some(open) => {
                return Err(Error::Parse {
                    line: line(t.line),
                    message: format!(
                        "`{}` does not close `{}` opened at line {}",
                        t.text,
                        tokens[open].text,
                        line(tokens[open].line)
                    ),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: line(t.line),
                    message: format!("unmatched `{}`", t.text),
                })
            }
        }
    }
    if let Some(open) = stack.pop() {
        return Err(Error::Parse {
            line: line(tokens[open].line),
            message: format!("unclosed `{}`", tokens[open].text),
        });
    }
    Ok(matching)
}

struct Parser<'t> {
    toks: &'t [Token],
    matching: Vec<usize>,
    pos: usize,
    line_map: Option<&'t [usize]>,
    nodes: Vec<Node>,
    methods: Vec<MethodDecl>,
    fields: Vec<FieldDecl>,
    classes: Vec<ClassDecl>,
    class_stack: Vec<String>,
}

impl<'t> Parser<'t> {
    fn map(&self, line: usize) -> usize {
        match self.line_map {
            Some(m) => m.get(line - 1).copied().unwrap_or(line),
            None => line,
        }
    }

    fn text(&self, i: usize) -> &'t str {
        self.toks.get(i).map_or("", |t| t.text.as_str())
    }

    fn span_of(&self, range: std::ops::Range<usize>) -> LineSpan {
        if range.is_empty() {
            let line = self.toks.get(range.start).map_or(1, |t| t.line);
            return LineSpan::new(self.map(line), self.map(line));
        }
        LineSpan::new(
            self.map(self.toks[range.start].line),
            self.map(self.toks[range.end - 1].end_line),
        )
    }

    fn join(&self, range: std::ops::Range<usize>) -> String {
        self.toks[range]
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn add_node(
        &mut self,
        kind: NodeKind,
        parent: NodeId,
        header: std::ops::Range<usize>,
        start: usize,
    ) -> NodeId {
        let id = self.nodes.len();
        let depth = self.nodes[parent].depth + 1;
        let header_span = self.span_of(header.clone());
        self.nodes.push(Node {
            kind,
            text: self.join(header.clone()),
            tokens: start..header.end.max(start),
            span: header_span,
            header_span,
            depth,
            parent: Some(parent),
            children: Vec::new(),
            body: None,
        });
        self.nodes[parent].children.push(id);
        id
    }

    /// Extends a node to end just before `self.pos`.
    fn close_node(&mut self, id: NodeId) {
        let start = self.nodes[id].tokens.start;
        let end = self.pos.max(start);
        self.nodes[id].tokens = start..end;
        self.nodes[id].span = self.span_of(start..end);
    }

    fn skip_annotations(&mut self, end: usize) {
        while self.pos < end && self.text(self.pos) == "@" && self.text(self.pos + 1) != "interface"
        {
            self.pos += 2;
            while self.text(self.pos) == "." && self.pos + 1 < end {
                self.pos += 2;
            }
            if self.text(self.pos) == "(" {
                self.pos = self.matching[self.pos] + 1;
            }
        }
    }

    // ---- class-level ----------------------------------------------------

    fn members(&mut self, parent: NodeId, end: usize) {
        while self.pos < end {
            self.member(parent, end);
        }
    }

    fn member(&mut self, parent: NodeId, end: usize) {
        if self.text(self.pos) == ";" {
            self.pos += 1;
            return;
        }
        let start = self.pos;
        self.skip_annotations(end);
        if self.pos >= end {
            return;
        }
        let head = self.pos;
        if matches!(self.text(head), "package" | "import" | "using") {
            self.pos = self.scan_to_semicolon(head, end);
            return;
        }
        // Find what terminates the member header.
        let mut i = head;
        let mut stop = None;
        while i < end {
            match self.text(i) {
                "(" | "[" => i = self.matching[i] + 1,
                "{" | ";" | "=" => {
                    stop = Some(i);
                    break;
                }
                _ => i += 1,
            }
        }
        let Some(stop) = stop else {
            // Trailing junk without terminator.
            let id = self.add_node(NodeKind::Structural(Structural::Field), parent, head..end, start);
            self.pos = end;
            self.close_node(id);
            return;
        };
        let header = head..stop;
        let has_paren = self.toks[header.clone()].iter().any(|t| t.is("("));
        let type_kw = self.toks[header.clone()]
            .iter()
            .enumerate()
            .position(|(k, t)| {
                // A type keyword opens a type only when a name follows it;
                // `record(...)` is an ordinary method.
                TYPE_KEYWORDS.contains(&t.text.as_str())
                    && (k == 0 || self.text(head + k - 1) != ".")
                    && self.toks.get(head + k + 1).is_some_and(|n| n.is_ident())
            })
            .map(|k| head + k);
        let stop_text = self.text(stop);
        match (stop_text, type_kw) {
            ("{", Some(kw)) => self.class_decl(parent, start, header, kw, stop),
            ("{", None) if has_paren => self.method_decl(parent, start, header, Some(stop)),
            ("{", None) => {
                // Initializer block or an unknown braced container.
                let all_mods = self.toks[header.clone()]
                    .iter()
                    .all(|t| MODIFIERS.contains(&t.text.as_str()));
                let close = self.matching[stop];
                if all_mods {
                    let id = self.add_node(
                        NodeKind::Structural(Structural::Block),
                        parent,
                        head..stop,
                        start,
                    );
                    self.nodes[id].body = Some((stop, close));
                    self.pos = stop + 1;
                    self.statements(id, close);
                    self.pos = close + 1;
                    self.close_node(id);
                } else {
                    let id = self.add_node(
                        NodeKind::Structural(Structural::Class),
                        parent,
                        head..stop,
                        start,
                    );
                    self.nodes[id].body = Some((stop, close));
                    self.pos = stop + 1;
                    self.members(id, close);
                    self.pos = close + 1;
                    self.close_node(id);
                }
            }
            (";", _) if has_paren && type_kw.is_none() => {
                self.method_decl(parent, start, header, None);
                self.pos = stop + 1;
            }
            _ => {
                let semi = self.scan_to_semicolon(stop, end);
                let decl_end = if self.text(semi - 1) == ";" { semi - 1 } else { semi };
                self.field_decl(parent, start, head..decl_end);
                self.pos = semi;
            }
        }
    }

    /// Position just past the next `;` at nesting depth zero.
    fn scan_to_semicolon(&self, from: usize, end: usize) -> usize {
        let mut i = from;
        while i < end {
            match self.text(i) {
                "(" | "[" | "{" => i = self.matching[i] + 1,
                ";" => return i + 1,
                _ => i += 1,
            }
        }
        end
    }

    fn class_decl(
        &mut self,
        parent: NodeId,
        start: usize,
        header: std::ops::Range<usize>,
        kw: usize,
        open: usize,
    ) {
        let name = self.toks[kw + 1..open]
            .iter()
            .find(|t| t.is_ident())
            .map(|t| t.text.clone())
            .unwrap_or_default();
        let is_enum = self.text(kw) == "enum";
        let close = self.matching[open];
        let id = self.add_node(NodeKind::Structural(Structural::Class), parent, header, start);
        self.nodes[id].body = Some((open, close));
        self.classes.push(ClassDecl {
            node: id,
            name: name.clone(),
        });
        self.class_stack.push(name);
        self.pos = open + 1;
        if is_enum {
            // Skip the constant list.
            let after = self.scan_to_semicolon(self.pos, close);
            self.pos = if after <= close && self.text(after - 1) == ";" {
                after
            } else {
                close
            };
        }
        self.members(id, close);
        self.class_stack.pop();
        self.pos = close + 1;
        self.close_node(id);
    }

    fn method_decl(
        &mut self,
        parent: NodeId,
        start: usize,
        header: std::ops::Range<usize>,
        open: Option<usize>,
    ) {
        let sig = parse_signature(&self.toks[header.clone()]);
        let id = self.add_node(NodeKind::Structural(Structural::Method), parent, header, start);
        self.methods.push(MethodDecl {
            node: id,
            name: sig.name,
            modifiers: sig.modifiers,
            return_type: sig.return_type,
            params: sig.params,
            class: self.class_stack.last().cloned(),
        });
        if let Some(open) = open {
            let close = self.matching[open];
            self.nodes[id].body = Some((open, close));
            self.pos = open + 1;
            self.statements(id, close);
            self.pos = close + 1;
            self.close_node(id);
        }
    }

    fn field_decl(
        &mut self,
        parent: NodeId,
        start: usize,
        decl: std::ops::Range<usize>,
    ) {
        let toks = &self.toks[decl.clone()];
        let mut k = 0;
        let mut modifiers = Vec::new();
        while k < toks.len() && MODIFIERS.contains(&toks[k].text.as_str()) {
            modifiers.push(toks[k].text.clone());
            k += 1;
        }
        let rest: Vec<&Token> = toks[k..].iter().collect();
        let mut names = Vec::new();
        let mut ty = String::new();
        for (n, seg) in split_top_level(&rest, ",").into_iter().enumerate() {
            let lhs_len = seg.iter().position(|t| t.is("=")).unwrap_or(seg.len());
            let lhs = &seg[..lhs_len];
            if n == 0 {
                if let Some(at) = lhs.iter().rposition(|t| t.is_ident()) {
                    names.push(lhs[at].text.clone());
                    ty = concat(&lhs[..at]);
                }
            } else if let Some(t) = lhs.iter().find(|t| t.is_ident()) {
                names.push(t.text.clone());
            }
        }
        let id = self.add_node(
            NodeKind::Structural(Structural::Field),
            parent,
            decl.clone(),
            start,
        );
        self.fields.push(FieldDecl {
            node: id,
            modifiers,
            ty,
            names,
            text: self.join(decl),
            class: self.class_stack.last().cloned(),
        });
    }

    // ---- statements -----------------------------------------------------

    fn statements(&mut self, parent: NodeId, end: usize) {
        while self.pos < end {
            let before = self.pos;
            self.statement(parent, end);
            if self.pos == before {
                // Never stall on an unexpected token.
                self.pos += 1;
            }
        }
    }

    fn statement(&mut self, parent: NodeId, end: usize) {
        let start = self.pos;
        let head = self.text(start);
        let next = self.text(start + 1);
        match head {
            ";" => self.pos += 1,
            "{" => {
                let close = self.matching[start];
                let id = self.add_node(
                    NodeKind::Structural(Structural::Block),
                    parent,
                    start..start,
                    start,
                );
                self.nodes[id].body = Some((start, close));
                self.pos = start + 1;
                self.statements(id, close);
                self.pos = close + 1;
                self.close_node(id);
            }
            "case" => {
                let mut i = start + 1;
                while i < end && !matches!(self.text(i), ":" | "->") {
                    i = if matches!(self.text(i), "(" | "[" | "{") {
                        self.matching[i] + 1
                    } else {
                        i + 1
                    };
                }
                self.pos = (i + 1).min(end);
            }
            "default" if matches!(next, ":" | "->") => self.pos += 2,
            "if" if next == "(" => {
                self.paren_compound(StatementKind::If, parent, end);
                self.else_chain(parent, end);
            }
            "for" | "while" if next == "(" => {
                let kind = if head == "for" {
                    StatementKind::For
                } else {
                    StatementKind::While
                };
                self.paren_compound(kind, parent, end);
            }
            "switch" | "synchronized" if next == "(" => {
                self.paren_compound(StatementKind::Other, parent, end);
            }
            "do" => self.do_while(parent, end),
            "try" => self.try_statement(parent, end),
            "else" | "catch" | "finally" => {
                // Orphaned continuation, e.g. a fragment starting mid-chain.
                if head == "else" {
                    self.else_chain(parent, end);
                } else {
                    self.handlers(parent, end);
                }
            }
            _ if next == ":" && self.toks[start].is_ident() => self.pos += 2,
            _ if self.local_type_decl(start, end) => self.member(parent, end),
            _ => self.simple(parent, end),
        }
    }

    fn local_type_decl(&self, start: usize, end: usize) -> bool {
        let mut i = start;
        while i < end && MODIFIERS.contains(&self.text(i)) {
            i += 1;
        }
        matches!(self.text(i), "class" | "interface" | "enum")
            && self.toks.get(i + 1).is_some_and(|t| t.is_ident())
    }

    /// `kw ( ... ) body`
    fn paren_compound(&mut self, kind: StatementKind, parent: NodeId, end: usize) {
        let start = self.pos;
        let close = self.matching[start + 1];
        let id = self.add_node(NodeKind::Statement(kind), parent, start..close + 1, start);
        self.pos = close + 1;
        self.body(id, end);
        self.close_node(id);
    }

    fn body(&mut self, id: NodeId, end: usize) {
        if self.pos >= end {
            return;
        }
        if self.text(self.pos) == "{" {
            let open = self.pos;
            let close = self.matching[open];
            self.nodes[id].body = Some((open, close));
            self.pos = open + 1;
            self.statements(id, close);
            self.pos = close + 1;
        } else {
            self.statement(id, end);
        }
    }

    fn else_chain(&mut self, parent: NodeId, end: usize) {
        while self.pos < end && self.text(self.pos) == "else" {
            let start = self.pos;
            if self.text(start + 1) == "if" && self.text(start + 2) == "(" {
                let close = self.matching[start + 2];
                let id = self.add_node(
                    NodeKind::Statement(StatementKind::ElseIf),
                    parent,
                    start..close + 1,
                    start,
                );
                self.pos = close + 1;
                self.body(id, end);
                self.close_node(id);
            } else {
                let id = self.add_node(
                    NodeKind::Structural(Structural::Else),
                    parent,
                    start..start + 1,
                    start,
                );
                self.pos = start + 1;
                self.body(id, end);
                self.close_node(id);
                break;
            }
        }
    }

    fn do_while(&mut self, parent: NodeId, end: usize) {
        let start = self.pos;
        let id = self.add_node(
            NodeKind::Statement(StatementKind::While),
            parent,
            start..start + 1,
            start,
        );
        self.pos = start + 1;
        self.body(id, end);
        if self.text(self.pos) == "while" && self.text(self.pos + 1) == "(" {
            let cond_close = self.matching[self.pos + 1];
            let cond = self.join(self.pos..cond_close + 1);
            self.nodes[id].text = format!("do {cond}");
            self.pos = cond_close + 1;
            if self.text(self.pos) == ";" {
                self.pos += 1;
            }
        }
        self.close_node(id);
    }

    fn try_statement(&mut self, parent: NodeId, end: usize) {
        let start = self.pos;
        let header_end = if self.text(start + 1) == "(" {
            self.matching[start + 1] + 1
        } else {
            start + 1
        };
        let id = self.add_node(
            NodeKind::Statement(StatementKind::Try),
            parent,
            start..header_end,
            start,
        );
        self.pos = header_end;
        self.body(id, end);
        self.close_node(id);
        self.handlers(parent, end);
    }

    fn handlers(&mut self, parent: NodeId, end: usize) {
        loop {
            let start = self.pos;
            if start >= end {
                return;
            }
            match self.text(start) {
                "catch" => {
                    let header_end = if self.text(start + 1) == "(" {
                        self.matching[start + 1] + 1
                    } else {
                        start + 1
                    };
                    let id = self.add_node(
                        NodeKind::Statement(StatementKind::Catch),
                        parent,
                        start..header_end,
                        start,
                    );
                    self.pos = header_end;
                    self.body(id, end);
                    self.close_node(id);
                }
                "finally" => {
                    let id = self.add_node(
                        NodeKind::Structural(Structural::Finally),
                        parent,
                        start..start + 1,
                        start,
                    );
                    self.pos = start + 1;
                    self.body(id, end);
                    self.close_node(id);
                    return;
                }
                _ => return,
            }
        }
    }

    fn simple(&mut self, parent: NodeId, end: usize) {
        let start = self.pos;
        let mut i = start;
        while i < end {
            match self.text(i) {
                "(" | "[" | "{" => i = self.matching[i] + 1,
                ";" => {
                    i += 1;
                    break;
                }
                "}" => break,
                _ => i += 1,
            }
        }
        let kind = classify(&self.toks[start..i]);
        self.add_node(NodeKind::Statement(kind), parent, start..i, start);
        self.pos = i;
    }
}

struct Signature {
    name: String,
    modifiers: Vec<String>,
    return_type: String,
    params: Vec<Param>,
}

fn strip_annotations(toks: &[Token]) -> Vec<&Token> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if toks[i].is("@") && i + 1 < toks.len() {
            i += 2;
            while i + 1 < toks.len() && toks[i].is(".") {
                i += 2;
            }
            if i < toks.len() && toks[i].is("(") {
                let mut depth = 0;
                while i < toks.len() {
                    if toks[i].is("(") {
                        depth += 1;
                    } else if toks[i].is(")") {
                        depth -= 1;
                        if depth == 0 {
                            i += 1;
                            break;
                        }
                    }
                    i += 1;
                }
            }
            continue;
        }
        out.push(&toks[i]);
        i += 1;
    }
    out
}

fn concat(toks: &[&Token]) -> String {
    toks.iter().map(|t| t.text.as_str()).collect()
}

fn split_top_level<'a>(toks: &[&'a Token], sep: &str) -> Vec<Vec<&'a Token>> {
    let mut out = vec![Vec::new()];
    let mut depth = 0i32;
    for &t in toks {
        match t.text.as_str() {
            "(" | "[" | "{" | "<" => depth += 1,
            ")" | "]" | "}" | ">" => depth -= 1,
            ">>" => depth -= 2,
            _ => {}
        }
        if depth == 0 && t.is(sep) {
            out.push(Vec::new());
        } else {
            out.last_mut().unwrap().push(t);
        }
    }
    out.retain(|s| !s.is_empty());
    out
}

fn parse_signature(header: &[Token]) -> Signature {
    let toks = strip_annotations(header);
    let open = {
        let mut angle = 0i32;
        toks.iter()
            .position(|t| {
                match t.text.as_str() {
                    "<" => angle += 1,
                    ">" => angle -= 1,
                    _ => {}
                }
                angle <= 0 && t.is("(")
            })
            .unwrap_or(toks.len())
    };
    let name = if open > 0 && open <= toks.len() {
        toks[open - 1].text.clone()
    } else {
        String::new()
    };
    let close = {
        let mut depth = 0;
        let mut found = toks.len();
        for (k, t) in toks.iter().enumerate().skip(open) {
            if t.is("(") {
                depth += 1;
            } else if t.is(")") {
                depth -= 1;
                if depth == 0 {
                    found = k;
                    break;
                }
            }
        }
        found
    };
    let params = if open < toks.len() {
        split_top_level(&toks[open + 1..close.max(open + 1)], ",")
            .into_iter()
            .filter_map(|seg| {
                let seg: Vec<&Token> = seg.into_iter().filter(|t| !t.is("final")).collect();
                let n = seg.iter().rposition(|t| t.is_ident())?;
                Some(Param {
                    ty: concat(&seg[..n]),
                    name: seg[n].text.clone(),
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    let before = &toks[..open.saturating_sub(1)];
    let mut k = 0;
    let mut modifiers = Vec::new();
    while k < before.len() && MODIFIERS.contains(&before[k].text.as_str()) {
        modifiers.push(before[k].text.clone());
        k += 1;
    }
    if k < before.len() && before[k].is("<") {
        let mut depth = 0;
        while k < before.len() {
            match before[k].text.as_str() {
                "<" => depth += 1,
                ">" => depth -= 1,
                _ => {}
            }
            k += 1;
            if depth == 0 {
                break;
            }
        }
    }
    Signature {
        name,
        modifiers,
        return_type: concat(&before[k..]),
        params,
    }
}

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
];

const NOT_TYPES: &[&str] = &[
    "return", "throw", "new", "assert", "break", "continue", "yield", "await", "this", "super",
    "delete", "goto",
];

/// Classifies a simple (non-compound) statement from its tokens.
pub fn classify(toks: &[Token]) -> StatementKind {
    let toks: Vec<&Token> = toks.iter().filter(|t| !t.is(";")).collect();
    let Some(first) = toks.first() else {
        return StatementKind::Other;
    };
    match first.text.as_str() {
        "return" => return StatementKind::Return,
        "throw" => return StatementKind::Throw,
        _ => {}
    }
    if is_declaration(&toks) {
        return StatementKind::VariableDeclaration;
    }
    // Assignment operator at depth zero, left side free of calls.
    let mut depth = 0i32;
    for (k, t) in toks.iter().enumerate() {
        match t.text.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            op if depth == 0 && ASSIGN_OPS.contains(&op) && k > 0 => {
                return StatementKind::Assignment;
            }
            _ => {}
        }
    }
    let incdec = |t: &&Token| t.is("++") || t.is("--");
    if toks.len() == 2 && (incdec(&toks[0]) || incdec(&toks[1])) {
        return StatementKind::Assignment;
    }
    let ends_in_call = toks.last().is_some_and(|t| t.is(")")) && toks.iter().any(|t| t.is("("));
    // `new T(..)` alone is an instance creation; `new T(..).m()` is a call.
    let chained = {
        let mut depth = 0i32;
        toks.iter().any(|t| {
            match t.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                _ => {}
            }
            depth == 0 && t.is(".")
        })
    };
    if ends_in_call && (!first.is("new") || chained) {
        return StatementKind::MethodInvocation;
    }
    StatementKind::Other
}

fn is_declaration(toks: &[&Token]) -> bool {
    let mut i = 0;
    while i < toks.len() && (MODIFIERS.contains(&toks[i].text.as_str()) || toks[i].is("@")) {
        if toks[i].is("@") {
            i += 1;
        }
        i += 1;
    }
    let Some(t) = toks.get(i) else { return false };
    if !t.is_ident() || NOT_TYPES.contains(&t.text.as_str()) {
        return false;
    }
    i += 1;
    while i + 1 < toks.len() && toks[i].is(".") && toks[i + 1].is_ident() {
        i += 2;
    }
    if i < toks.len() && toks[i].is("<") {
        let mut depth = 0i32;
        while i < toks.len() {
            match toks[i].text.as_str() {
                "<" => depth += 1,
                ">" => depth -= 1,
                "(" | ")" | "=" | ";" => return false,
                _ => {}
            }
            i += 1;
            if depth == 0 {
                break;
            }
        }
        if depth != 0 {
            return false;
        }
    }
    while i + 1 < toks.len() && toks[i].is("[") && toks[i + 1].is("]") {
        i += 2;
    }
    if i < toks.len() && toks[i].is("...") {
        return false;
    }
    let Some(name) = toks.get(i) else { return false };
    if !name.is_ident() {
        return false;
    }
    match toks.get(i + 1) {
        None => true,
        Some(t) => matches!(t.text.as_str(), "=" | "," | "[" | ":"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(tree: &SyntaxTree) -> Vec<(StatementKind, usize)> {
        tree.statements()
            .into_iter()
            .map(|n| (tree.node(n).kind.statement().unwrap(), tree.node(n).depth))
            .collect()
    }

    fn frag(src: &str) -> SyntaxTree {
        let lines: Vec<(usize, String)> = src
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.to_string()))
            .collect();
        parse_fragment(&lines, GrammarId::CurlyBrace).unwrap()
    }

    #[test]
    fn while_contains_invocation() {
        let tree = frag("while (x) { y(); }");
        assert_eq!(
            kinds(&tree),
            vec![
                (StatementKind::While, 1),
                (StatementKind::MethodInvocation, 2)
            ]
        );
        assert_eq!(tree.node(tree.statements()[0]).text, "while ( x )");
    }

    #[test]
    fn declaration_with_call_initializer() {
        let tree = frag("int a = f(b);");
        assert_eq!(kinds(&tree), vec![(StatementKind::VariableDeclaration, 1)]);
    }

    #[test]
    fn stray_brace_is_a_parse_error() {
        let err = parse("class A {}\n} }", GrammarId::CurlyBrace).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn unclosed_brace_reports_opening_line() {
        let err = parse("class A {\n void f() {\n}", GrammarId::CurlyBrace).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn statement_taxonomy() {
        let src = "\
if (a) { x = 1; } else if (b) { y++; } else { z.q(); }
for (int i = 0; i < n; i++) { continue; }
for (String s : list) total += s.length();
do { i--; } while (i > 0);
try (Reader r = open()) { throw new IOException(\"x\"); } catch (IOException e) { log(e); } finally { close(); }
List<Map<String, Integer>> m = new HashMap<>();
final int[] arr = {1, 2};
this.size = 4;
return size;
new Thread(() -> { run(); }).start();
assert n > 0;
";
        let tree = frag(src);
        let got: Vec<StatementKind> = kinds(&tree).into_iter().map(|(k, _)| k).collect();
        use StatementKind::*;
        assert_eq!(
            got,
            vec![
                If,
                Assignment,
                ElseIf,
                Assignment,
                MethodInvocation,
                For,
                Other,
                For,
                Assignment,
                While,
                Assignment,
                Try,
                Throw,
                Catch,
                MethodInvocation,
                MethodInvocation,
                VariableDeclaration,
                VariableDeclaration,
                Assignment,
                Return,
                MethodInvocation,
                Other,
            ]
        );
    }

    #[test]
    fn class_members_and_signatures() {
        let src = "\
package a.b;
import java.util.List;
/** Holder. */
public class Holder<T> extends Base {
    private int size = 8;
    public static final String A = \"a\", B = \"b\";
    @Override
    public <K> Map<K, List<T>> group(final List<T> items, Function<T, K> key) throws IOException {
        return null;
    }
    Holder() { super(); }
    abstract void hook(int a);
    static { init(); }
    enum Mode { ON, OFF; void flip() {} }
}
";
        let tree = parse(src, GrammarId::CurlyBrace).unwrap();
        let keys: Vec<String> = tree.methods.iter().map(|m| m.key()).collect();
        assert_eq!(
            keys,
            vec![
                "group(List<T>,Function<T,K>)",
                "Holder()",
                "hook(int)",
                "flip()"
            ]
        );
        let group = &tree.methods[0];
        assert_eq!(group.return_type, "Map<K,List<T>>");
        assert_eq!(group.modifiers, vec!["public"]);
        assert_eq!(group.class.as_deref(), Some("Holder"));
        assert_eq!(tree.fields.len(), 2);
        assert_eq!(tree.fields[0].names, vec!["size"]);
        assert_eq!(tree.fields[0].ty, "int");
        assert_eq!(tree.fields[1].names, vec!["A", "B"]);
        assert_eq!(tree.classes[0].name, "Holder");
        assert_eq!(tree.classes[1].name, "Mode");
    }

    #[test]
    fn type_keywords_as_method_names() {
        let src = "class L {\n    void record(long v) { t = v; }\n    record Point(int x) {}\n}\n";
        let tree = parse(src, GrammarId::CurlyBrace).unwrap();
        assert_eq!(tree.methods[0].key(), "record(long)");
        assert_eq!(tree.classes.len(), 2);
        assert_eq!(tree.classes[1].name, "Point");
    }

    #[test]
    fn comments_attach_to_innermost_body() {
        let src = "\
class A {
    void f() {
        // first
        a();
        if (x) {
            // nested
            b();
        }
        c(); // trailing
    }
}
";
        let tree = parse(src, GrammarId::CurlyBrace).unwrap();
        let c = &tree.comments;
        assert_eq!(c.len(), 3);
        let f = tree.methods[0].node;
        assert_eq!(c[0].parent, f);
        assert_eq!(c[0].index, 0);
        assert_eq!(tree.node(c[1].parent).kind, NodeKind::Statement(StatementKind::If));
        assert_eq!(c[1].depth, c[0].depth + 1);
        assert!(c[2].comment.trailing);
    }

    #[test]
    fn fragment_lines_are_remapped() {
        let lines = vec![(40, "int a = 1;".to_string()), (42, "a++;".to_string())];
        let tree = parse_fragment(&lines, GrammarId::CurlyBrace).unwrap();
        let spans: Vec<LineSpan> = tree.statements().iter().map(|&n| tree.node(n).span).collect();
        assert_eq!(spans, vec![LineSpan::new(40, 40), LineSpan::new(42, 42)]);
    }
}
