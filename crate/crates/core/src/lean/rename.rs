use std::collections::HashMap;

use super::lexer::{tokenize, TokenKind};
use super::LeanSyntaxError;
use crate::task::Lemma;

/// Binder name of the `i`-th selected lemma.
pub fn selection_binder(i: usize) -> String {
    format!("l_{i}")
}

fn is_selection_binder(name: &str) -> bool {
    name.strip_prefix("l_").is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Rename binders to `l_0 … l_{m-1}` in selection order and rewrite references
/// to the old names inside the statements.
///
/// When two selected lemmas share an old name, a reference resolves to the
/// nearest preceding lemma with that name.
pub fn rename_binders(selection: Vec<Lemma>) -> Result<Vec<Lemma>, LeanSyntaxError> {
    let old: Vec<String> = selection.iter().map(|l| l.binder_name.clone()).collect();

    let mut out = Vec::with_capacity(selection.len());
    for (j, mut lemma) in selection.into_iter().enumerate() {
        let mut mapping: HashMap<&str, String> = HashMap::new();
        // later lemmas first so that nearer preceding ones win
        for (i, name) in old.iter().enumerate().rev() {
            if i >= j {
                mapping.insert(name.as_str(), selection_binder(i));
            }
        }
        for (i, name) in old.iter().enumerate().take(j) {
            mapping.insert(name.as_str(), selection_binder(i));
        }

        let src = lemma.statement_text.clone();
        let toks = tokenize(&src);
        let mut text = String::with_capacity(src.len());
        for (k, t) in toks.iter().enumerate() {
            let piece = t.text(&src);
            let dotted = k > 0 && toks[k - 1].text(&src) == "." && toks[k - 1].kind == TokenKind::Symbol;
            if t.kind == TokenKind::Ident && !dotted {
                if let Some(new) = mapping.get(piece) {
                    text.push_str(new);
                    continue;
                }
                if is_selection_binder(piece) {
                    return Err(LeanSyntaxError::BinderCollision { lemma: j, token: piece.to_string() });
                }
            }
            text.push_str(piece);
        }
        lemma.binder_name = selection_binder(j);
        lemma.set_statement(text);
        out.push(lemma);
    }
    Ok(out)
}
