//! Tokenizer for curly-brace languages.
//!
//! Produces code tokens and comments as two separate streams. Each comment
//! records the index of the first code token that follows it, which is how the
//! parser later attaches comments to the tree without making them nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub end_line: usize,
    /// Byte offsets into the lexed source.
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Ident
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommentStyle {
    Line,
    Block,
    Doc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub style: CommentStyle,
    /// Raw text including delimiters.
    pub text: String,
    pub start_line: usize,
    pub end_line: usize,
    pub start: usize,
    pub end: usize,
    /// Index of the first code token after this comment.
    pub next_token: usize,
    /// A code token precedes the comment on its first line.
    pub trailing: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
}

const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=",
];

pub fn lex(source: &str) -> Result<Lexed> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    out: Lexed,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            out: Lexed::default(),
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src[self.pos..].chars().next()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn run(mut self) -> Result<Lexed> {
        while let Some(b) = self.peek(0) {
            match b {
                b'/' if self.peek(1) == Some(b'/') => self.line_comment(),
                b'/' if self.peek(1) == Some(b'*') => self.block_comment()?,
                b'"' => self.string()?,
                b'\'' => self.char_literal()?,
                b'0'..=b'9' => self.number(),
                b if b.is_ascii_whitespace() => {
                    self.bump();
                }
                _ => {
                    let c = self.src[self.pos..].chars().next().unwrap_or(' ');
                    if c.is_alphabetic() || c == '_' || c == '$' {
                        self.ident();
                    } else {
                        self.punct();
                    }
                }
            }
        }
        Ok(self.out)
    }

    fn push_token(&mut self, kind: TokenKind, start: usize, line: usize) {
        self.out.tokens.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            line,
            end_line: self.line,
            start,
            end: self.pos,
        });
    }

    fn push_comment(&mut self, style: CommentStyle, start: usize, line: usize) {
        let trailing = self
            .out
            .tokens
            .last()
            .is_some_and(|t| t.end_line == line);
        self.out.comments.push(Comment {
            style,
            text: self.src[start..self.pos].to_string(),
            start_line: line,
            end_line: self.line,
            start,
            end: self.pos,
            next_token: self.out.tokens.len(),
            trailing,
        });
    }

    fn line_comment(&mut self) {
        let (start, line) = (self.pos, self.line);
        while let Some(b) = self.peek(0) {
            if b == b'\n' {
                break;
            }
            self.bump();
        }
        // `\r\n` line endings: keep the carriage return out of the text.
        let mut end = self.pos;
        while end > start && self.bytes[end - 1] == b'\r' {
            end -= 1;
        }
        let saved = self.pos;
        self.pos = end;
        self.push_comment(CommentStyle::Line, start, line);
        self.pos = saved;
    }

    fn block_comment(&mut self) -> Result<()> {
        let (start, line) = (self.pos, self.line);
        let doc = self.peek(2) == Some(b'*') && self.peek(3) != Some(b'/');
        self.pos += 2;
        loop {
            match self.peek(0) {
                None => {
                    return Err(Error::Parse {
                        line,
                        message: "unterminated block comment".into(),
                    })
                }
                Some(b'*') if self.peek(1) == Some(b'/') => {
                    self.pos += 2;
                    break;
                }
                _ => {
                    self.bump();
                }
            }
        }
        let style = if doc {
            CommentStyle::Doc
        } else {
            CommentStyle::Block
        };
        self.push_comment(style, start, line);
        Ok(())
    }

    fn string(&mut self) -> Result<()> {
        let (start, line) = (self.pos, self.line);
        if self.src[self.pos..].starts_with("\"\"\"") {
            self.pos += 3;
            match self.src[self.pos..].find("\"\"\"") {
                Some(off) => {
                    let end = self.pos + off + 3;
                    while self.pos < end {
                        self.bump();
                    }
                }
                None => {
                    return Err(Error::Parse {
                        line,
                        message: "unterminated text block".into(),
                    })
                }
            }
        } else {
            self.quoted(b'"', line)?;
        }
        self.push_token(TokenKind::Str, start, line);
        Ok(())
    }

    fn char_literal(&mut self) -> Result<()> {
        let (start, line) = (self.pos, self.line);
        self.quoted(b'\'', line)?;
        self.push_token(TokenKind::Char, start, line);
        Ok(())
    }

    fn quoted(&mut self, quote: u8, line: usize) -> Result<()> {
        self.pos += 1;
        loop {
            match self.peek(0) {
                None | Some(b'\n') => {
                    return Err(Error::Parse {
                        line,
                        message: "unterminated literal".into(),
                    })
                }
                Some(b'\\') => {
                    self.pos += 1;
                    self.bump();
                }
                Some(b) if b == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn number(&mut self) {
        let (start, line) = (self.pos, self.line);
        while let Some(b) = self.peek(0) {
            let exponent_sign = (b == b'+' || b == b'-')
                && matches!(self.bytes[self.pos - 1], b'e' | b'E')
                && !self.src[start..self.pos].starts_with("0x");
            if b.is_ascii_alphanumeric() || b == b'_' || exponent_sign {
                self.pos += 1;
            } else if b == b'.' && self.peek(1).is_some_and(|n| n.is_ascii_digit()) {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.push_token(TokenKind::Number, start, line);
    }

    fn ident(&mut self) {
        let (start, line) = (self.pos, self.line);
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_alphanumeric() || c == '_' || c == '$' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        self.push_token(TokenKind::Ident, start, line);
    }

    fn punct(&mut self) {
        let (start, line) = (self.pos, self.line);
        let rest = &self.src[self.pos..];
        if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            self.pos += op.len();
        } else {
            self.bump();
        }
        self.push_token(TokenKind::Punct, start, line);
    }
}

/// Token texts of `source`, with comments dropped. Lexing errors fall back to
/// whitespace splitting so this never fails on statement text.
pub fn token_texts(source: &str) -> Vec<String> {
    match lex(source) {
        Ok(lexed) => lexed.tokens.into_iter().map(|t| t.text).collect(),
        Err(_) => source.split_whitespace().map(str::to_string).collect(),
    }
}
