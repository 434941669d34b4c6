use std::sync::Arc;
use std::time::Duration;

use super::{classify, ProofChecker};
use crate::lean::lexer::{tokenize, TokenKind};
use crate::lean::{delimiters_balanced, LeanSource};
use crate::task::{Message, Position, Severity, VerificationResult, VerificationStatus};

type Rule = dyn Fn(&LeanSource) -> Option<VerificationResult> + Send + Sync;

/// Lexical stand-in for Lean.
///
/// A body fails when it contains the tactic `fail`, the identifier
/// `INVALID` or unbalanced delimiters; `sorry` gives the usual warning;
/// the identifier `SPIN` times out. Everything else is proved. A custom
/// rule may decide first.
#[derive(Clone, Default)]
pub struct MockVerifier {
    rule: Option<Arc<Rule>>,
    history: Vec<LeanSource>,
}

impl MockVerifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rule(rule: impl Fn(&LeanSource) -> Option<VerificationResult> + Send + Sync + 'static) -> Self {
        Self { rule: Some(Arc::new(rule)), history: Vec::new() }
    }

    /// Every source checked so far.
    pub fn history(&self) -> &[LeanSource] {
        &self.history
    }

    pub fn judge(body: &str, timeout: Duration) -> VerificationResult {
        let toks = tokenize(body);
        let idents = || toks.iter().filter(|t| t.kind == TokenKind::Ident).map(|t| t.text(body));
        if idents().any(|t| t == "SPIN") {
            return VerificationResult {
                status: VerificationStatus::Timeout,
                messages: vec![],
                contains_sorry: false,
                elapsed: timeout.as_secs_f64(),
            };
        }
        let mut messages = Vec::new();
        if !delimiters_balanced(body) {
            messages.push(error("unexpected token; unbalanced delimiters"));
        }
        if let Some(t) = idents().find(|t| *t == "fail" || *t == "INVALID") {
            messages.push(error(&format!("{t}: elaboration failed")));
        }
        if crate::lean::contains_sorry(body) {
            messages.push(Message {
                severity: Severity::Warning,
                pos: Some(Position { line: 1, column: 0 }),
                text: "declaration uses 'sorry'".into(),
            });
        }
        classify(body, messages, 0, 0.0)
    }
}

fn error(text: &str) -> Message {
    Message { severity: Severity::Error, pos: Some(Position { line: 1, column: 0 }), text: text.into() }
}

impl ProofChecker for MockVerifier {
    fn check(&mut self, source: &LeanSource, timeout: Duration) -> VerificationResult {
        self.history.push(source.clone());
        if let Some(r) = self.rule.as_ref().and_then(|rule| rule(source)) {
            return r;
        }
        Self::judge(&source.body, timeout)
    }
}
