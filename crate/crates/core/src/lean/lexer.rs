//! A small lexical scanner for Lean 4 source text.
//!
//! The scanner is not a full Lean grammar. It recognises just enough
//! structure (identifiers, delimiters, comments, string literals and the
//! handful of multi-character symbols that matter for splitting) to locate
//! spans reliably. Every byte of the input belongs to exactly one token.

use super::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Open(char),
    Close(char),
    /// `:=`, `::`, `:` and any other punctuation character.
    Symbol,
    LineComment,
    BlockComment,
    Str,
    Whitespace,
    Newline,
}

impl TokenKind {
    /// Tokens that are neither trivia nor prose.
    pub fn is_code(self) -> bool {
        !matches!(
            self,
            TokenKind::LineComment
                | TokenKind::BlockComment
                | TokenKind::Str
                | TokenKind::Whitespace
                | TokenKind::Newline
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.span.start..self.span.end]
    }
}

pub const OPENERS: [char; 6] = ['(', '[', '{', '⟨', '⦃', '⟦'];
pub const CLOSERS: [char; 6] = [')', ']', '}', '⟩', '⦄', '⟧'];

pub fn is_ident_start(c: char) -> bool {
    (c.is_alphabetic() && c != 'λ' && c != 'Π' && c != 'Σ') || c == '_'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '!' | '?')
}

/// Split `src` into tokens. Unterminated comments and strings run to the
/// end of the input.
pub fn tokenize(src: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = src.char_indices().peekable();

    while let Some(&(start, c)) = chars.peek() {
        let next = src[start + c.len_utf8()..].chars().next();
        let kind = if c == '\n' {
            chars.next();
            TokenKind::Newline
        } else if c.is_whitespace() {
            while chars.next_if(|&(_, ch)| ch.is_whitespace() && ch != '\n').is_some() {}
            TokenKind::Whitespace
        } else if c == '-' && next == Some('-') {
            while chars.next_if(|&(_, ch)| ch != '\n').is_some() {}
            TokenKind::LineComment
        } else if c == '/' && next == Some('-') {
            chars.next();
            chars.next();
            let mut depth = 1usize;
            while depth > 0 {
                match chars.next() {
                    None => break,
                    Some((i, '/')) if src[i + 1..].starts_with('-') => {
                        chars.next();
                        depth += 1;
                    }
                    Some((i, '-')) if src[i + 1..].starts_with('/') => {
                        chars.next();
                        depth -= 1;
                    }
                    Some(_) => {}
                }
            }
            TokenKind::BlockComment
        } else if c == '"' {
            chars.next();
            loop {
                match chars.next() {
                    None | Some((_, '"')) => break,
                    Some((_, '\\')) => {
                        chars.next();
                    }
                    Some(_) => {}
                }
            }
            TokenKind::Str
        } else if is_ident_start(c) {
            chars.next();
            while chars.next_if(|&(_, ch)| is_ident_continue(ch)).is_some() {}
            TokenKind::Ident
        } else if c.is_ascii_digit() {
            while chars.next_if(|&(_, ch)| ch.is_ascii_alphanumeric() || ch == '_').is_some() {}
            TokenKind::Number
        } else if OPENERS.contains(&c) {
            chars.next();
            TokenKind::Open(c)
        } else if CLOSERS.contains(&c) {
            chars.next();
            TokenKind::Close(c)
        } else if c == ':' && matches!(next, Some('=') | Some(':')) {
            chars.next();
            chars.next();
            TokenKind::Symbol
        } else {
            chars.next();
            TokenKind::Symbol
        };
        let end = chars.peek().map_or(src.len(), |&(i, _)| i);
        tokens.push(Token { kind, span: SourceSpan::new(start, end) });
    }
    tokens
}

/// Byte offsets of every line start.
#[derive(Debug, Clone)]
pub struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(src: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
        Self { starts }
    }

    pub fn line_of(&self, offset: usize) -> usize {
        match self.starts.binary_search(&offset) {
            Ok(l) => l,
            Err(l) => l - 1,
        }
    }

    pub fn line_start(&self, line: usize) -> usize {
        self.starts[line]
    }

    pub fn line_count(&self) -> usize {
        self.starts.len()
    }

    /// Column of `offset`, counted in characters.
    pub fn column(&self, src: &str, offset: usize) -> usize {
        let start = self.starts[self.line_of(offset)];
        src[start..offset].chars().count()
    }
}
