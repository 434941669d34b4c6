use super::lexer::{tokenize, TokenKind};
use super::LeanSyntaxError;

/// A theorem header split at its first top-level `:`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementSplit {
    /// Everything before the colon, e.g. `theorem t (a b : Nat)`.
    pub binder_segment: String,
    /// Everything after the colon.
    pub goal_segment: String,
    /// `theorem`, `lemma` or `example`.
    pub keyword: String,
    /// Declared name; `None` for `example`.
    pub name: Option<String>,
    /// Binder text between the name and the colon.
    pub binders: String,
}

pub fn split_statement(formal_statement: &str) -> Result<StatementSplit, LeanSyntaxError> {
    let src = formal_statement;
    let toks = tokenize(src);
    let code: Vec<_> = toks.iter().filter(|t| t.kind.is_code()).collect();

    let mut depth = 0i32;
    let mut colon = None;
    for t in &code {
        match t.kind {
            TokenKind::Open(_) => depth += 1,
            TokenKind::Close(_) => depth -= 1,
            // binders are bracketed, so the first bare colon ends them; a
            // later one belongs to the goal, as in `∀ n : ℕ, …`
            TokenKind::Symbol if depth == 0 && t.text(src) == ":" && colon.is_none() => colon = Some(t.span),
            _ => {}
        }
    }
    let colon = colon.ok_or_else(|| LeanSyntaxError::NoTopLevelColon(src.to_string()))?;

    let kw = code
        .iter()
        .position(|t| t.kind == TokenKind::Ident && matches!(t.text(src), "theorem" | "lemma" | "example"))
        .filter(|&p| code[p].span.start < colon.start)
        .ok_or(LeanSyntaxError::MissingKeyword)?;
    let keyword = code[kw].text(src).to_string();

    let mut header_end = code[kw].span.end;
    let mut name = None;
    if keyword != "example" {
        if let Some(first) = code.get(kw + 1).filter(|t| t.kind == TokenKind::Ident) {
            // dotted names such as `Foo.bar` arrive as ident/./ident runs
            let mut end = first.span.end;
            let mut p = kw + 2;
            while p + 1 < code.len()
                && code[p].text(src) == "."
                && code[p].span.start == end
                && code[p + 1].kind == TokenKind::Ident
                && code[p + 1].span.start == code[p].span.end
            {
                end = code[p + 1].span.end;
                p += 2;
            }
            name = Some(src[first.span.start..end].to_string());
            header_end = end;
        }
    }

    Ok(StatementSplit {
        binder_segment: src[..colon.start].trim().to_string(),
        goal_segment: src[colon.end..].trim().to_string(),
        keyword,
        name,
        binders: src[header_end.min(colon.start)..colon.start].trim().to_string(),
    })
}
