//! Recovering a proof body from raw prover output.

use crate::lean::lexer::{tokenize, TokenKind};
use crate::lean::{dedent, dedent_region};

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

/// The tactic block a completion contributes after `:= by`.
///
/// The prompt leaves a ```` ```lean4 ```` fence open, so a well-behaved
/// completion is the proof followed by a closing fence. A completion that
/// opens its own fence or restates the theorem is cut down to the text after
/// the restated `:= by`.
pub fn extract_proof_body(completion: &str) -> String {
    let lines: Vec<&str> = completion.lines().collect();
    let code: Vec<&str> = match lines.iter().position(|l| l.trim_start().starts_with("```lean")) {
        Some(open) => lines[open + 1..].iter().take_while(|l| !is_fence(l)).copied().collect(),
        None => lines.iter().take_while(|l| !is_fence(l)).copied().collect(),
    };
    let code = code.join("\n");
    let body = after_restated_header(&code).unwrap_or(code);
    let body = match body.split_once('\n') {
        Some((head, rest)) if !head.trim().is_empty() && body.starts_with(|c: char| !c.is_whitespace()) => {
            dedent_region(head, &rest.lines().collect::<Vec<_>>())
        }
        _ => dedent(&body),
    };
    body.trim_matches('\n').trim_end().to_string()
}

/// Text after `:= by` (or `:=`) of a restated declaration, if any.
fn after_restated_header(code: &str) -> Option<String> {
    let toks = tokenize(code);
    let kw = toks.iter().position(|t| {
        t.kind == TokenKind::Ident && matches!(t.text(code), "theorem" | "lemma" | "example")
    })?;
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate().skip(kw + 1) {
        match t.kind {
            TokenKind::Open(_) => depth += 1,
            TokenKind::Close(_) => depth -= 1,
            TokenKind::Symbol if depth == 0 && t.text(code) == ":=" => {
                let next = toks[i + 1..].iter().find(|t| !matches!(t.kind, TokenKind::Whitespace));
                let start = match next {
                    Some(n) if n.kind == TokenKind::Ident && n.text(code) == "by" => n.span.end,
                    _ => t.span.end,
                };
                let rest = &code[start..];
                // drop the remainder of the `:= by` line when it is blank
                return Some(match rest.split_once('\n') {
                    Some((head, tail)) if head.trim().is_empty() => tail.to_string(),
                    _ => rest.trim_start_matches([' ', '\t']).to_string(),
                });
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuation_with_closing_fence() {
        let c = "  -- positivity of x\n  have h : x > 0 := by\n    linarith\n  nlinarith [h]\n```\nSome prose after.";
        assert_eq!(extract_proof_body(c), "-- positivity of x\nhave h : x > 0 := by\n  linarith\nnlinarith [h]");
    }

    #[test]
    fn restated_theorem_in_new_fence() {
        let c = "Here is the proof:\n```lean4\nimport Mathlib\ntheorem t (x : ℝ) (h : x = 2) : x ^ 2 = 4 := by\n  subst h\n  norm_num\n```";
        assert_eq!(extract_proof_body(c), "subst h\nnorm_num");
    }

    #[test]
    fn inline_by() {
        assert_eq!(extract_proof_body("theorem t : True := by trivial\n```"), "trivial");
        assert_eq!(extract_proof_body("trivial"), "trivial");
    }

    #[test]
    fn empty_completion() {
        assert_eq!(extract_proof_body(""), "");
        assert_eq!(extract_proof_body("```"), "");
    }

    #[test]
    fn have_named_theorem_is_not_restatement() {
        // `theorem` inside a comment does not count
        let c = "  -- by the theorem above\n  simp\n```";
        assert_eq!(extract_proof_body(c), "-- by the theorem above\nsimp");
    }
}
