//! Structural parsing and synthesis of Lean 4 proof text.
//!
//! Everything here is lexical: spans are located by scanning tokens, tracking
//! delimiter depth and reading indentation, never by elaborating. The Lean
//! REPL remains the final judge of whether any produced text is meaningful.

mod compose;
mod extract;
pub mod lexer;
mod rename;
mod statement;

pub use compose::{
    build_lemma_theorem, build_main_theorem, embed_guidance, embed_summary, lemma_theorem_header,
    main_theorem_header, salvage_source, splice_final_proof, syntax_check_source, LeanSource,
};
pub(crate) use extract::dedent_region;
pub use extract::{dedupe_pool, extract_have_statements, scan_haves, HaveScan, ScannedHave};
pub use rename::{rename_binders, selection_binder};
pub use statement::{split_statement, StatementSplit};

use lexer::{tokenize, TokenKind};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &SourceSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LeanSyntaxError {
    #[error("text contains `/-` or `-/` and cannot be embedded in a block comment")]
    EmbeddingUnsafe,
    #[error("no top-level `:` in statement `{0}`")]
    NoTopLevelColon(String),
    #[error("statement does not start with `theorem`, `lemma` or `example`")]
    MissingKeyword,
    #[error("binder `{token}` already appears in lemma {lemma} with a different meaning")]
    BinderCollision { lemma: usize, token: String },
    #[error("lemma index {index} out of range for a selection of {len}")]
    LemmaIndex { index: usize, len: usize },
    #[error("selection is empty")]
    EmptySelection,
    #[error("no verified proof for lemma l_{0}")]
    MissingLemmaProof(usize),
    #[error("main proof body is empty")]
    EmptyMainProof,
}

/// Collapse whitespace runs to single spaces and trim.
pub fn normalize_statement(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True iff `sorry` occurs as a standalone code token.
pub fn contains_sorry(text: &str) -> bool {
    let toks = tokenize(text);
    toks.iter().enumerate().any(|(i, t)| {
        t.kind == TokenKind::Ident
            && t.text(text) == "sorry"
            && !(i > 0 && toks[i - 1].kind == TokenKind::Symbol && toks[i - 1].text(text) == ".")
    })
}

/// Properly nested delimiters over code tokens (comments and strings are ignored).
pub fn delimiters_balanced(text: &str) -> bool {
    let mut stack = Vec::new();
    for t in tokenize(text) {
        match t.kind {
            TokenKind::Open(c) => stack.push(c),
            TokenKind::Close(c) => {
                let want = lexer::OPENERS[lexer::CLOSERS.iter().position(|&x| x == c).unwrap()];
                if stack.pop() != Some(want) {
                    return false;
                }
            }
            _ => {}
        }
    }
    stack.is_empty()
}

/// Break up comment delimiters so `text` can sit inside `/- ... -/`.
pub fn sanitize_comment(text: &str) -> String {
    text.replace("-/", "- /").replace("/-", "/ -")
}

/// Indent every non-empty line of `text` by `width` spaces.
pub(crate) fn indent(text: &str, width: usize) -> String {
    let pad = " ".repeat(width);
    text.lines()
        .map(|l| if l.trim().is_empty() { String::new() } else { format!("{pad}{l}") })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Remove the indentation common to all non-blank lines.
pub(crate) fn dedent(text: &str) -> String {
    let min = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.chars().take_while(|c| c.is_whitespace()).count())
        .min()
        .unwrap_or(0);
    text.lines()
        .map(|l| l.chars().skip(min).collect::<String>().trim_end().to_string())
        .collect::<Vec<_>>()
        .join("\n")
}
