//! `have` statement extraction.
//!
//! A proof region starts after the top-level `:=`. It owns the rest of that
//! line plus every following line whose first code token sits strictly to the
//! right of the `have` keyword. Blank and comment-only lines are neutral: they
//! are kept only when a later line continues the region. While a delimiter
//! opened inside the region is still unclosed, lines are taken regardless of
//! indentation.

use std::collections::HashMap;

use super::lexer::{tokenize, LineIndex, Token, TokenKind};
use super::SourceSpan;
use crate::task::{Lemma, ProofKind, ProofText};

#[derive(Debug, Clone)]
pub struct ScannedHave {
    pub lemma: Lemma,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Default)]
pub struct HaveScan {
    pub haves: Vec<ScannedHave>,
    /// `have` keywords that did not match `have <binder> : <stmt> := <proof>`.
    pub skipped: usize,
}

/// Every `have` statement of `proof_text`, nested ones included, in source order.
pub fn extract_have_statements(proof_text: &str) -> Vec<Lemma> {
    scan_haves(proof_text).haves.into_iter().map(|h| h.lemma).collect()
}

pub fn scan_haves(src: &str) -> HaveScan {
    let toks = tokenize(src);
    let lines = LineIndex::new(src);
    let code: Vec<usize> = (0..toks.len()).filter(|&i| toks[i].kind.is_code()).collect();
    let layout = LineLayout::new(src, &toks, &lines);

    let mut scan = HaveScan::default();
    let mut anon = 0usize;
    for (pos, &ti) in code.iter().enumerate() {
        let t = toks[ti];
        if t.kind != TokenKind::Ident || t.text(src) != "have" {
            continue;
        }
        if ti > 0 && toks[ti - 1].kind == TokenKind::Symbol && toks[ti - 1].text(src) == "." {
            continue;
        }
        let cx = Cursor { src, toks: &toks, code: &code, lines: &lines, layout: &layout };
        match cx.parse_have(pos, &mut anon) {
            Some(h) => scan.haves.push(h),
            None => scan.skipped += 1,
        }
    }
    scan
}

/// Per-line facts computed on code tokens only.
struct LineLayout {
    /// Column of the first code token on the line, if any.
    first_code_col: Vec<Option<usize>>,
    /// Net delimiter depth change of the line's code tokens.
    depth_delta: Vec<i32>,
}

impl LineLayout {
    fn new(src: &str, toks: &[Token], lines: &LineIndex) -> Self {
        let n = lines.line_count();
        let mut first_code_col = vec![None; n];
        let mut depth_delta = vec![0; n];
        for t in toks.iter().filter(|t| t.kind.is_code()) {
            let l = lines.line_of(t.span.start);
            if first_code_col[l].is_none() {
                first_code_col[l] = Some(lines.column(src, t.span.start));
            }
            depth_delta[l] += depth_step(t.kind);
        }
        Self { first_code_col, depth_delta }
    }
}

fn depth_step(kind: TokenKind) -> i32 {
    match kind {
        TokenKind::Open(_) => 1,
        TokenKind::Close(_) => -1,
        _ => 0,
    }
}

struct Cursor<'a> {
    src: &'a str,
    toks: &'a [Token],
    code: &'a [usize],
    lines: &'a LineIndex,
    layout: &'a LineLayout,
}

impl Cursor<'_> {
    fn tok(&self, pos: usize) -> Option<Token> {
        self.code.get(pos).map(|&i| self.toks[i])
    }

    fn is_sym(&self, pos: usize, sym: &str) -> bool {
        self.tok(pos).is_some_and(|t| t.kind == TokenKind::Symbol && t.text(self.src) == sym)
    }

    fn line_text(&self, line: usize) -> &str {
        let start = self.lines.line_start(line);
        let end = if line + 1 < self.lines.line_count() {
            self.lines.line_start(line + 1) - 1
        } else {
            self.src.len()
        };
        &self.src[start..end]
    }

    fn line_end(&self, line: usize) -> usize {
        if line + 1 < self.lines.line_count() {
            self.lines.line_start(line + 1) - 1
        } else {
            self.src.len()
        }
    }

    fn parse_have(&self, have_pos: usize, anon: &mut usize) -> Option<ScannedHave> {
        let have = self.tok(have_pos)?;
        let col = self.lines.column(self.src, have.span.start);
        let mut pos = have_pos + 1;
        let first = self.tok(pos)?;

        let mut pattern_binder = false;
        let name = match first.kind {
            TokenKind::Symbol if first.text(self.src) == ":" => {
                let n = format!("anon_{anon}");
                *anon += 1;
                n
            }
            TokenKind::Open('⟨') => {
                let mut depth = 0i32;
                loop {
                    depth += depth_step(self.tok(pos)?.kind);
                    pos += 1;
                    if depth == 0 {
                        break;
                    }
                }
                if !self.is_sym(pos, ":") {
                    return None;
                }
                pattern_binder = true;
                let n = format!("anon_{anon}");
                *anon += 1;
                n
            }
            TokenKind::Ident => {
                pos += 1;
                if !self.is_sym(pos, ":") {
                    return None;
                }
                first.text(self.src).to_string()
            }
            _ => return None,
        };
        let colon = self.tok(pos)?;
        pos += 1;

        // statement: up to the top-level `:=`, never leaving the have's block
        let mut depth = 0i32;
        let mut prev_line = self.lines.line_of(colon.span.start);
        let assign = loop {
            let t = self.tok(pos)?;
            let line = self.lines.line_of(t.span.start);
            if line != prev_line && depth == 0 {
                // every line crossed must still be indented past the `have`
                let crossed = (prev_line + 1..=line).filter_map(|l| self.layout.first_code_col[l]);
                if crossed.into_iter().any(|c| c <= col) {
                    return None;
                }
            }
            prev_line = line;
            if depth == 0 && t.kind == TokenKind::Symbol && t.text(self.src) == ":=" {
                break t;
            }
            depth += depth_step(t.kind);
            pos += 1;
        };
        let statement = self.src[colon.span.end..assign.span.start].trim().to_string();

        // proof region
        let assign_line = self.lines.line_of(assign.span.start);
        let mut depth: i32 = self.code[pos + 1..]
            .iter()
            .map(|&i| self.toks[i])
            .take_while(|t| self.lines.line_of(t.span.start) == assign_line)
            .map(|t| depth_step(t.kind))
            .sum();
        let mut region_lines = Vec::new();
        let mut pending = Vec::new();
        for l in assign_line + 1..self.lines.line_count() {
            let ind = self.layout.first_code_col[l];
            let take = depth > 0 || ind.is_some_and(|i| i > col);
            if ind.is_none() && depth <= 0 {
                pending.push(l);
            } else if take {
                region_lines.append(&mut pending);
                region_lines.push(l);
                depth += self.layout.depth_delta[l];
            } else {
                break;
            }
        }
        let region_end = region_lines.last().map_or(self.line_end(assign_line), |&l| self.line_end(l));

        // first code token of the region decides tactic vs term mode
        let first_code = self.tok(pos + 1).filter(|t| t.span.start < region_end);
        let (kind, text) = match first_code {
            Some(t) if t.kind == TokenKind::Ident && t.text(self.src) == "by" => {
                let by_line = self.lines.line_of(t.span.start);
                let head = &self.src[t.span.end..self.line_end(by_line)];
                let rest: Vec<&str> = region_lines
                    .iter()
                    .filter(|&&l| l > by_line)
                    .map(|&l| self.line_text(l))
                    .collect();
                (ProofKind::Tactic, dedent_region(head, &rest))
            }
            _ => {
                let head = &self.src[assign.span.end..self.line_end(assign_line)];
                let rest: Vec<&str> = region_lines.iter().map(|&l| self.line_text(l)).collect();
                (ProofKind::Term, dedent_region(head, &rest))
            }
        };

        let mut lemma = Lemma::new(name, statement);
        lemma.pattern_binder = pattern_binder;
        if !text.trim().is_empty() {
            lemma.proofs.push(ProofText { kind, text });
        }
        Some(ScannedHave { lemma, span: SourceSpan::new(have.span.start, region_end) })
    }
}

/// Merge lemmas with equal normalized statements, keeping first-seen order,
/// the union of source attempts and every distinct proof.
pub fn dedupe_pool(lemmas: Vec<Lemma>) -> Vec<Lemma> {
    let mut out: Vec<Lemma> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for lemma in lemmas {
        match seen.get(lemma.normalized_statement()) {
            Some(&i) => {
                let kept = &mut out[i];
                kept.source_attempts.extend(lemma.source_attempts);
                kept.pattern_binder &= lemma.pattern_binder;
                for p in lemma.proofs {
                    if !kept.proofs.contains(&p) {
                        kept.proofs.push(p);
                    }
                }
            }
            None => {
                seen.insert(lemma.normalized_statement().to_string(), out.len());
                out.push(lemma);
            }
        }
    }
    out
}

pub(crate) fn dedent_region(head: &str, rest: &[&str]) -> String {
    let min = rest
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.chars().take_while(|c| c.is_whitespace()).count())
        .min()
        .unwrap_or(0);
    let mut out: Vec<String> = Vec::new();
    if !head.trim().is_empty() {
        out.push(head.trim().to_string());
    }
    out.extend(rest.iter().map(|l| l.chars().skip(min).collect::<String>().trim_end().to_string()));
    while out.last().is_some_and(|l| l.is_empty()) {
        out.pop();
    }
    while out.first().is_some_and(|l| l.is_empty()) {
        out.remove(0);
    }
    out.join("\n")
}
