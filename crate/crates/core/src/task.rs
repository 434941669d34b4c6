//! Domain types shared by every stage of the pipeline, plus the run-log
//! record schema.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lean::{self, lexer};
use crate::orchestrator::PipelinePhase;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("formal statement is empty")]
    EmptyStatement,
    #[error("formal statement has no `theorem` or `example` keyword")]
    MissingKeyword,
    #[error("formal statement contains `sorry`")]
    ContainsSorry,
    #[error("formal statement has unbalanced delimiters")]
    Unbalanced,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BudgetError {
    #[error("prover budget exhausted ({consumed}/{total})")]
    Exhausted { consumed: u32, total: u32 },
    #[error("attempt index {got} out of sequence, expected {expected}")]
    OutOfSequence { got: u32, expected: u32 },
    #[error("unknown stage `{0}`")]
    UnknownStage(String),
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremTask {
    pub name: String,
    pub formal_statement: String,
    pub informal_statement: String,
    pub preamble: String,
}

impl TheoremTask {
    pub fn new(
        name: impl Into<String>,
        formal_statement: impl Into<String>,
        informal_statement: impl Into<String>,
        preamble: impl Into<String>,
    ) -> Result<Self, TaskError> {
        let task = Self {
            name: name.into(),
            formal_statement: formal_statement.into().trim().to_string(),
            informal_statement: informal_statement.into(),
            preamble: preamble.into(),
        };
        validate_formal_statement(&task.formal_statement)?;
        Ok(task)
    }

    /// The task name made safe for use inside a Lean identifier.
    pub fn ident(&self) -> String {
        self.name
            .chars()
            .map(|c| if lexer::is_ident_continue(c) { c } else { '_' })
            .collect()
    }
}

pub fn validate_formal_statement(stmt: &str) -> Result<(), TaskError> {
    if stmt.trim().is_empty() {
        return Err(TaskError::EmptyStatement);
    }
    let has_keyword = lexer::tokenize(stmt).iter().any(|t| {
        t.kind == lexer::TokenKind::Ident && matches!(t.text(stmt), "theorem" | "example")
    });
    if !has_keyword {
        return Err(TaskError::MissingKeyword);
    }
    if lean::contains_sorry(stmt) {
        return Err(TaskError::ContainsSorry);
    }
    if !lean::delimiters_balanced(stmt) {
        return Err(TaskError::Unbalanced);
    }
    Ok(())
}

/// The guidance model's proof and the summary embedded in prover prompts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NlGuidance {
    pub full_proof: String,
    pub summary: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntaxValidity {
    #[default]
    Unchecked,
    Valid,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofKind {
    /// Body of a `by` block.
    Tactic,
    /// A proof term.
    Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProofText {
    pub kind: ProofKind,
    pub text: String,
}

impl ProofText {
    pub fn tactic(text: impl Into<String>) -> Self {
        Self { kind: ProofKind::Tactic, text: text.into() }
    }

    /// Tactic-block form, usable after `:= by`.
    pub fn as_tactic(&self) -> String {
        match self.kind {
            ProofKind::Tactic => self.text.clone(),
            ProofKind::Term => {
                let mut lines = self.text.lines();
                let head = lines.next().unwrap_or_default();
                let mut out = format!("exact {head}");
                for l in lines {
                    out.push('\n');
                    if !l.trim().is_empty() {
                        out.push_str("  ");
                        out.push_str(l);
                    }
                }
                out
            }
        }
    }
}

/// One extracted `have` statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma {
    pub binder_name: String,
    pub statement_text: String,
    normalized_statement: String,
    /// Every distinct proof seen for this statement, first-seen order.
    pub proofs: Vec<ProofText>,
    pub source_attempts: BTreeSet<u32>,
    pub syntax_valid: SyntaxValidity,
    /// Destructuring binder such as `⟨a, b⟩`; cannot be named directly.
    pub pattern_binder: bool,
}

impl Lemma {
    pub fn new(binder_name: impl Into<String>, statement_text: impl Into<String>) -> Self {
        let statement_text = statement_text.into();
        Self {
            binder_name: binder_name.into(),
            normalized_statement: lean::normalize_statement(&statement_text),
            statement_text,
            proofs: Vec::new(),
            source_attempts: BTreeSet::new(),
            syntax_valid: SyntaxValidity::Unchecked,
            pattern_binder: false,
        }
    }

    pub fn with_proof(mut self, proof: ProofText) -> Self {
        self.proofs.push(proof);
        self
    }

    pub fn from_attempt(mut self, attempt_index: u32) -> Self {
        self.source_attempts.insert(attempt_index);
        self
    }

    pub fn normalized_statement(&self) -> &str {
        &self.normalized_statement
    }

    pub fn set_statement(&mut self, text: String) {
        self.normalized_statement = lean::normalize_statement(&text);
        self.statement_text = text;
    }

    /// First proof seen for this statement.
    pub fn proof_text(&self) -> Option<&ProofText> {
        self.proofs.first()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedLemma {
    pub index: usize,
    pub lemma: Lemma,
    pub informal_proof: String,
}

/// The ordered choice of at most `k` lemmas plus their informal proofs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaSelection {
    pub items: Vec<SelectedLemma>,
    pub main_informal_proof: String,
    /// Set when some informal proof was replaced by the full NL proof.
    pub degraded: bool,
}

impl LemmaSelection {
    /// Builds a selection from already-renamed lemmas; informal proofs start empty.
    pub fn from_lemmas(lemmas: Vec<Lemma>) -> Self {
        Self {
            items: lemmas
                .into_iter()
                .enumerate()
                .map(|(index, lemma)| SelectedLemma { index, lemma, informal_proof: String::new() })
                .collect(),
            main_informal_proof: String::new(),
            degraded: false,
        }
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn statements(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.lemma.statement_text.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerificationStatus {
    Proved,
    Failed,
    Timeout,
    TransportError,
}

impl VerificationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Proved => "proved",
            Self::Failed => "failed",
            Self::Timeout => "timeout",
            Self::TransportError => "transport-error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub severity: Severity,
    pub pos: Option<Position>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub status: VerificationStatus,
    pub messages: Vec<Message>,
    pub contains_sorry: bool,
    pub elapsed: f64,
}

impl VerificationResult {
    pub fn is_proved(&self) -> bool {
        self.status == VerificationStatus::Proved
    }

    pub fn has_errors(&self) -> bool {
        self.messages.iter().any(|m| m.severity == Severity::Error)
    }

    pub fn transport_error(text: impl Into<String>, elapsed: f64) -> Self {
        Self {
            status: VerificationStatus::TransportError,
            messages: vec![Message { severity: Severity::Error, pos: None, text: text.into() }],
            contains_sorry: false,
            elapsed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Initial,
    MainSketch,
    Lemma(usize),
    Fallback,
}

impl Stage {
    /// Bucket used for per-stage budget accounting.
    pub fn category(self) -> &'static str {
        match self {
            Stage::Initial => "initial",
            Stage::MainSketch => "main_sketch",
            Stage::Lemma(_) => "lemma",
            Stage::Fallback => "fallback",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Lemma(i) => write!(f, "lemma_{i}"),
            other => f.write_str(other.category()),
        }
    }
}

impl FromStr for Stage {
    type Err = BudgetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "initial" => Ok(Stage::Initial),
            "main_sketch" => Ok(Stage::MainSketch),
            "fallback" => Ok(Stage::Fallback),
            other => other
                .strip_prefix("lemma_")
                .and_then(|i| i.parse().ok())
                .map(Stage::Lemma)
                .ok_or_else(|| BudgetError::UnknownStage(s.to_string())),
        }
    }
}

impl Serialize for Stage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Stage {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One prover call and its verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofAttempt {
    pub attempt_index: u32,
    pub stage: Stage,
    pub prompt_text: String,
    pub completion_text: String,
    pub proof_body: String,
    pub verification: VerificationResult,
    pub gen_seconds: f64,
    pub verify_seconds: f64,
}

impl ProofAttempt {
    pub fn log_line(&self, theorem: &str) -> AttemptLogLine {
        AttemptLogLine {
            theorem: theorem.to_string(),
            attempt_index: self.attempt_index,
            stage: self.stage,
            prompt_sha256: sha256_hex(&self.prompt_text),
            completion: self.completion_text.clone(),
            status: self.verification.status,
            contains_sorry: self.verification.contains_sorry,
            gen_seconds: self.gen_seconds,
            verify_seconds: self.verify_seconds,
        }
    }
}

/// Prover-call accounting for one theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub total: u32,
    pub consumed: u32,
    pub per_stage: BTreeMap<String, u32>,
    pub guidance_calls: u32,
    pub guidance_timings: BTreeMap<String, f64>,
}

impl BudgetLedger {
    pub fn new(total: u32) -> Self {
        Self {
            total,
            consumed: 0,
            per_stage: BTreeMap::new(),
            guidance_calls: 0,
            guidance_timings: BTreeMap::new(),
        }
    }

    pub fn remaining(&self) -> u32 {
        self.total - self.consumed
    }

    pub fn is_exhausted(&self) -> bool {
        self.consumed >= self.total
    }

    /// Index the next recorded attempt must carry.
    pub fn next_index(&self) -> u32 {
        self.consumed + 1
    }

    pub fn record_attempt(&mut self, attempt: &ProofAttempt) -> Result<(), BudgetError> {
        self.record(attempt.attempt_index, attempt.stage)
    }

    fn record(&mut self, attempt_index: u32, stage: Stage) -> Result<(), BudgetError> {
        if self.consumed >= self.total {
            return Err(BudgetError::Exhausted { consumed: self.consumed, total: self.total });
        }
        if attempt_index != self.next_index() {
            return Err(BudgetError::OutOfSequence { got: attempt_index, expected: self.next_index() });
        }
        self.consumed += 1;
        *self.per_stage.entry(stage.category().to_string()).or_default() += 1;
        Ok(())
    }

    pub fn record_guidance(&mut self, task: GuidanceTask, seconds: f64) {
        self.guidance_calls += 1;
        *self.guidance_timings.entry(task.as_str().to_string()).or_default() += seconds;
    }

    /// Rebuild a ledger from persisted log lines of a single theorem.
    pub fn replay<'a>(
        total: u32,
        attempts: impl IntoIterator<Item = &'a AttemptLogLine>,
        guidance: impl IntoIterator<Item = &'a GuidanceLogLine>,
    ) -> Result<Self, BudgetError> {
        let mut ledger = Self::new(total);
        for a in attempts {
            ledger.record(a.attempt_index, a.stage)?;
        }
        for g in guidance {
            ledger.record_guidance(g.task, g.seconds);
        }
        Ok(ledger)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Salvaged,
    LoopProved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenLemma {
    /// Tactic-block text.
    pub proof_text: String,
    pub provenance: Provenance,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProvenSetError {
    #[error("proof of l_{index} refers to l_{referenced}")]
    ForwardReference { index: usize, referenced: usize },
}

/// Lemmas with verified formal proofs. Entries are never replaced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenSet {
    entries: BTreeMap<usize, ProvenLemma>,
}

impl ProvenSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `Ok(false)` when the index is already proven.
    pub fn insert(
        &mut self,
        index: usize,
        proof_text: impl Into<String>,
        provenance: Provenance,
    ) -> Result<bool, ProvenSetError> {
        let proof_text = proof_text.into();
        if let Some(referenced) = referenced_lemma_indices(&proof_text).into_iter().find(|&j| j >= index) {
            return Err(ProvenSetError::ForwardReference { index, referenced });
        }
        if self.entries.contains_key(&index) {
            return Ok(false);
        }
        self.entries.insert(index, ProvenLemma { proof_text, provenance });
        Ok(true)
    }

    pub fn get(&self, index: usize) -> Option<&ProvenLemma> {
        self.entries.get(&index)
    }

    pub fn contains(&self, index: usize) -> bool {
        self.entries.contains_key(&index)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn covers(&self, m: usize) -> bool {
        (0..m).all(|i| self.entries.contains_key(&i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &ProvenLemma)> {
        self.entries.iter().map(|(i, p)| (*i, p))
    }
}

/// Indices `j` of every `l_j` identifier used in code positions of `text`.
pub fn referenced_lemma_indices(text: &str) -> BTreeSet<usize> {
    lexer::tokenize(text)
        .iter()
        .filter(|t| t.kind == lexer::TokenKind::Ident)
        .filter_map(|t| t.text(text).strip_prefix("l_")?.parse().ok())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremOutcome {
    pub task: String,
    pub solved: bool,
    pub solving_attempt_index: Option<u32>,
    pub final_proof: Option<String>,
    pub final_status: Option<VerificationStatus>,
    pub phase_trace: Vec<PipelinePhase>,
    pub ledger: BudgetLedger,
    /// Set when the theorem was aborted by an endpoint or verifier failure.
    pub infrastructure_failure: Option<String>,
    pub diagnostics: Vec<String>,
    /// Unbudgeted Lean checks by kind: `syntax_check`, `salvage`, `assembly`.
    #[serde(default)]
    pub checks: BTreeMap<String, Timing>,
}

/// Call count and total seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub count: u32,
    pub seconds: f64,
}

impl Timing {
    pub fn add(&mut self, seconds: f64) {
        self.count += 1;
        self.seconds += seconds;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.seconds / self.count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceTask {
    NlProof,
    Summary,
    Selection,
    LemmaProofs,
}

impl GuidanceTask {
    pub const ALL: [GuidanceTask; 4] =
        [GuidanceTask::NlProof, GuidanceTask::Summary, GuidanceTask::Selection, GuidanceTask::LemmaProofs];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NlProof => "nl_proof",
            Self::Summary => "summary",
            Self::Selection => "selection",
            Self::LemmaProofs => "lemma_proofs",
        }
    }
}

/// One line of the attempt log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttemptLogLine {
    pub theorem: String,
    pub attempt_index: u32,
    pub stage: Stage,
    pub prompt_sha256: String,
    pub completion: String,
    pub status: VerificationStatus,
    pub contains_sorry: bool,
    pub gen_seconds: f64,
    pub verify_seconds: f64,
}

/// One line of the guidance log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceLogLine {
    pub theorem: String,
    pub task: GuidanceTask,
    pub seconds: f64,
    pub response_sha256: String,
}
