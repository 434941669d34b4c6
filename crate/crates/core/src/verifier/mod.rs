//! Formal verification of generated Lean source.

mod mock;
mod pool;
mod repl;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use mock::MockVerifier;
pub use pool::{Lease, SessionPool};
pub use repl::{ReplConfig, ReplSession, SessionHealth};

use crate::lean::{contains_sorry, salvage_source, syntax_check_source, LeanSource};
use crate::task::{Message, Severity, SyntaxValidity, TheoremTask, VerificationResult, VerificationStatus};

/// Anything that can elaborate a source unit and report on it.
pub trait ProofChecker: Send {
    fn check(&mut self, source: &LeanSource, timeout: Duration) -> VerificationResult;
}

impl<C: ProofChecker + ?Sized> ProofChecker for Box<C> {
    fn check(&mut self, source: &LeanSource, timeout: Duration) -> VerificationResult {
        (**self).check(source, timeout)
    }
}

/// Proved iff there is no error, no reported sorry and no `sorry` token.
pub fn classify(body: &str, messages: Vec<Message>, sorries: usize, elapsed: f64) -> VerificationResult {
    let contains_sorry = sorries > 0
        || contains_sorry(body)
        || messages.iter().any(|m| m.severity == Severity::Warning && m.text.contains("declaration uses 'sorry'"));
    let errors = messages.iter().any(|m| m.severity == Severity::Error);
    let status = if errors || contains_sorry { VerificationStatus::Failed } else { VerificationStatus::Proved };
    VerificationResult { status, messages, contains_sorry, elapsed }
}

pub fn check_proof(checker: &mut dyn ProofChecker, source: &LeanSource, timeout: Duration) -> VerificationResult {
    checker.check(source, timeout)
}

/// Elaborate `statement` as the goal of a sorry-stubbed theorem over the
/// task's global binders. Valid iff the only complaints are about `sorry`.
pub fn check_lemma_syntax(
    checker: &mut dyn ProofChecker,
    task: &TheoremTask,
    statement: &str,
    timeout: Duration,
) -> (SyntaxValidity, VerificationResult) {
    let source = match syntax_check_source(task, statement) {
        Ok(s) => s,
        Err(e) => {
            return (SyntaxValidity::Invalid, VerificationResult {
                status: VerificationStatus::Failed,
                messages: vec![Message { severity: Severity::Error, pos: None, text: e.to_string() }],
                contains_sorry: false,
                elapsed: 0.0,
            })
        }
    };
    let result = checker.check(&source, timeout);
    let valid = matches!(result.status, VerificationStatus::Proved | VerificationStatus::Failed) && !result.has_errors();
    (if valid { SyntaxValidity::Valid } else { SyntaxValidity::Invalid }, result)
}

/// Check a harvested proof of `statement` using only the global hypotheses.
pub fn check_salvaged_proof(
    checker: &mut dyn ProofChecker,
    task: &TheoremTask,
    statement: &str,
    proof: &str,
    timeout: Duration,
) -> VerificationResult {
    let failed = |text: String| VerificationResult {
        status: VerificationStatus::Failed,
        messages: vec![Message { severity: Severity::Error, pos: None, text }],
        contains_sorry: false,
        elapsed: 0.0,
    };
    if proof.trim().is_empty() {
        return failed("empty proof".into());
    }
    match salvage_source(task, statement, proof) {
        Ok(source) => checker.check(&source, timeout),
        Err(e) => failed(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifierKind {
    #[default]
    Repl,
    Mock,
}

/// The `[verifier]` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifierConfig {
    pub kind: VerifierKind,
    pub command: Vec<String>,
    pub cwd: Option<PathBuf>,
    pub startup_timeout_s: f64,
    /// Kill and respawn allowance on top of the verification timeout.
    pub grace_s: f64,
    /// Session count; defaults to the worker count.
    pub sessions: Option<usize>,
    /// Recorded in the run report only.
    pub toolchain: Option<String>,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            kind: VerifierKind::Repl,
            command: vec!["lake".into(), "exe".into(), "repl".into()],
            cwd: None,
            startup_timeout_s: 900.0,
            grace_s: 2.0,
            sessions: None,
            toolchain: None,
        }
    }
}

impl VerifierConfig {
    pub fn mock() -> Self {
        Self { kind: VerifierKind::Mock, ..Self::default() }
    }

    pub fn repl_config(&self) -> ReplConfig {
        ReplConfig {
            command: self.command.clone(),
            cwd: self.cwd.clone(),
            startup_timeout: Duration::from_secs_f64(self.startup_timeout_s.max(0.0)),
        }
    }

    /// `n` fresh sessions; REPL processes start lazily on first use.
    pub fn build_pool(&self, n: usize) -> SessionPool {
        let sessions = (0..n.max(1))
            .map(|_| -> Box<dyn ProofChecker> {
                match self.kind {
                    VerifierKind::Repl => Box::new(ReplSession::new(self.repl_config())),
                    VerifierKind::Mock => Box::new(MockVerifier::new()),
                }
            })
            .collect();
        SessionPool::new(sessions)
    }
}
