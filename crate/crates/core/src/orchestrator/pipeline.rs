use std::collections::BTreeMap;

use super::completion::extract_proof_body;
use super::{PipelineConfig, PipelinePhase, RunSink};
use crate::clock::{timed, Clock};
use crate::guidance::Guide;
use crate::lean::{
    dedupe_pool, embed_guidance, extract_have_statements, lemma_theorem_header, main_theorem_header,
    sanitize_comment, splice_final_proof, LeanSource,
};
use crate::model::{ChatMessage, CompletionRequest, ModelClient, TemplateId, TemplateSet};
use crate::task::{
    BudgetLedger, Lemma, LemmaSelection, Message, ProofAttempt, Provenance, ProvenSet, Severity,
    Stage, SyntaxValidity, TheoremOutcome, TheoremTask, Timing, VerificationResult, VerificationStatus,
};
use crate::verifier::{check_lemma_syntax, check_salvaged_proof, ProofChecker};

/// The three endpoints a pipeline talks to.
#[derive(Clone, Copy)]
pub struct Endpoints<'a> {
    pub reasoner: &'a dyn ModelClient,
    pub worker: &'a dyn ModelClient,
    pub prover: &'a dyn ModelClient,
}

/// An endpoint or verifier failure that ends the theorem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abort(pub String);

/// Result of a bounded run of prover attempts.
#[derive(Debug, Clone, PartialEq)]
pub enum AttemptRun {
    Solved { attempt_index: u32, proof_body: String },
    Unsolved,
}

/// One theorem's pipeline with exclusive ownership of its ledger and
/// proven set.
pub struct Pipeline<'a> {
    pub task: &'a TheoremTask,
    pub config: &'a PipelineConfig,
    prover: &'a dyn ModelClient,
    guide: Guide<'a>,
    templates: &'a TemplateSet,
    checker: &'a mut dyn ProofChecker,
    clock: &'a dyn Clock,
    sink: &'a mut dyn RunSink,
    pub ledger: BudgetLedger,
    pub trace: Vec<PipelinePhase>,
    pub attempts: Vec<ProofAttempt>,
    pub diagnostics: Vec<String>,
    pub checks: BTreeMap<String, Timing>,
}

impl<'a> Pipeline<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        task: &'a TheoremTask,
        config: &'a PipelineConfig,
        endpoints: Endpoints<'a>,
        templates: &'a TemplateSet,
        checker: &'a mut dyn ProofChecker,
        clock: &'a dyn Clock,
        sink: &'a mut dyn RunSink,
    ) -> Self {
        Self {
            task,
            config,
            prover: endpoints.prover,
            guide: Guide::new(endpoints.reasoner, endpoints.worker, templates, clock),
            templates,
            checker,
            clock,
            sink,
            ledger: BudgetLedger::new(config.budget),
            trace: Vec::new(),
            attempts: Vec::new(),
            diagnostics: Vec::new(),
            checks: BTreeMap::new(),
        }
    }

    fn enter(&mut self, phase: PipelinePhase) {
        if let Some(&last) = self.trace.last() {
            debug_assert!(last.can_transition_to(phase), "{last:?} -> {phase:?}");
        }
        self.trace.push(phase);
    }

    fn note(&mut self, text: String) {
        tracing::debug!(theorem = %self.task.name, "{text}");
        self.diagnostics.push(text);
    }

    /// Move guidance calls into the ledger and the sink.
    fn flush_guidance(&mut self) {
        for call in std::mem::take(&mut self.guide.calls) {
            self.ledger.record_guidance(call.task, call.seconds);
            self.sink.guidance(&self.task.name, &call);
        }
        let warnings = std::mem::take(&mut self.guide.warnings);
        self.diagnostics.extend(warnings);
    }

    fn check(&mut self, kind: &str, source: &LeanSource) -> VerificationResult {
        let timeout = self.config.verify_timeout();
        let (r, secs) = timed(self.clock, || self.checker.check(source, timeout));
        self.checks.entry(kind.to_string()).or_default().add(secs);
        r
    }

    /// One budgeted prover call on `header`, verified immediately.
    pub fn prover_attempt(&mut self, stage: Stage, header: &str, guidance: Option<&str>) -> Result<ProofAttempt, Abort> {
        assert!(!self.ledger.is_exhausted(), "prover call issued with no budget left");
        let guidance = guidance.map(sanitize_comment);
        let code = embed_guidance(header, &self.task.preamble, guidance.as_deref())
            .expect("guidance is sanitized before embedding");
        let prompt = self
            .templates
            .render(TemplateId::ProverCot, &[("code", &code)])
            .map_err(|e| Abort(e.to_string()))?;
        let request = CompletionRequest::new(&self.task.name, vec![ChatMessage::user(prompt.clone())]);
        let (completion, gen_seconds) = timed(self.clock, || self.prover.complete(&request));
        let completion = completion.map_err(|e| Abort(e.to_string()))?;

        let proof_body = extract_proof_body(&completion.text);
        let timeout = self.config.verify_timeout();
        let (verification, verify_seconds) = if proof_body.trim().is_empty() {
            (
                VerificationResult {
                    status: VerificationStatus::Failed,
                    messages: vec![Message { severity: Severity::Error, pos: None, text: "empty proof".into() }],
                    contains_sorry: false,
                    elapsed: 0.0,
                },
                0.0,
            )
        } else {
            let source = LeanSource::theorem(&self.task.preamble, header, &proof_body);
            timed(self.clock, || self.checker.check(&source, timeout))
        };

        let attempt = ProofAttempt {
            attempt_index: self.ledger.next_index(),
            stage,
            prompt_text: prompt,
            completion_text: completion.text,
            proof_body,
            verification,
            gen_seconds,
            verify_seconds,
        };
        self.ledger.record_attempt(&attempt).expect("budget checked above");
        self.sink.attempt(&self.task.name, &attempt);
        self.attempts.push(attempt.clone());
        if attempt.verification.status == VerificationStatus::TransportError {
            return Err(Abort(format!("verifier transport failure on attempt {}", attempt.attempt_index)));
        }
        Ok(attempt)
    }

    /// Up to `n` attempts on the original theorem, stopping at the first proof.
    pub fn run_attempts(&mut self, stage: Stage, n: u32, summary: Option<&str>) -> Result<AttemptRun, Abort> {
        let header = self.task.formal_statement.clone();
        for _ in 0..n {
            if self.ledger.is_exhausted() {
                break;
            }
            let a = self.prover_attempt(stage, &header, summary)?;
            if a.verification.is_proved() {
                return Ok(AttemptRun::Solved { attempt_index: a.attempt_index, proof_body: a.proof_body });
            }
        }
        Ok(AttemptRun::Unsolved)
    }

    pub fn run_initial_attempts(&mut self, n: u32, summary: Option<&str>) -> Result<AttemptRun, Abort> {
        self.run_attempts(Stage::Initial, n, summary)
    }

    /// Remaining budget spent on plain guided attempts.
    pub fn fallback_direct(&mut self, summary: Option<&str>) -> Result<AttemptRun, Abort> {
        let n = self.ledger.remaining();
        self.run_attempts(Stage::Fallback, n, summary)
    }

    /// Haves of every failed initial attempt, deduplicated, syntax-checked
    /// and capped by how many attempts produced them.
    pub fn build_lemma_pool(&mut self) -> Vec<Lemma> {
        let mut raw = Vec::new();
        for a in self.attempts.iter().filter(|a| a.stage == Stage::Initial && !a.verification.is_proved()) {
            raw.extend(extract_have_statements(&a.proof_body).into_iter().map(|l| l.from_attempt(a.attempt_index)));
        }
        let mut pool = Vec::new();
        for mut lemma in dedupe_pool(raw) {
            let timeout = self.config.verify_timeout();
            let task = self.task;
            let ((validity, result), secs) =
                timed(self.clock, || check_lemma_syntax(self.checker, task, &lemma.statement_text, timeout));
            self.checks.entry("syntax_check".into()).or_default().add(secs);
            if result.status == VerificationStatus::TransportError {
                self.note(format!("syntax check of `{}` hit a verifier failure", lemma.statement_text));
            }
            lemma.syntax_valid = validity;
            if validity == SyntaxValidity::Valid {
                pool.push(lemma);
            }
        }
        if pool.len() > self.config.pool_cap {
            let mut order: Vec<usize> = (0..pool.len()).collect();
            order.sort_by_key(|&i| std::cmp::Reverse(pool[i].source_attempts.len()));
            order.truncate(self.config.pool_cap);
            order.sort_unstable();
            let keep: std::collections::BTreeSet<usize> = order.into_iter().collect();
            pool = pool.into_iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, l)| l).collect();
        }
        pool
    }

    /// Lemmas whose harvested proofs verify under the global hypotheses alone.
    pub fn salvage(&mut self, selection: &LemmaSelection) -> ProvenSet {
        let mut proven = ProvenSet::new();
        let timeout = self.config.verify_timeout();
        for item in &selection.items {
            for proof in &item.lemma.proofs {
                let text = proof.as_tactic();
                let task = self.task;
                let (r, secs) = timed(self.clock, || {
                    check_salvaged_proof(self.checker, task, &item.lemma.statement_text, &text, timeout)
                });
                self.checks.entry("salvage".into()).or_default().add(secs);
                if r.is_proved() {
                    match proven.insert(item.index, text, Provenance::Salvaged) {
                        Ok(_) => break,
                        Err(e) => self.note(e.to_string()),
                    }
                }
            }
        }
        proven
    }

    /// Proof of the theorem with every selected lemma as a hypothesis.
    pub fn attempt_main_sketch(&mut self, selection: &LemmaSelection) -> Result<Option<String>, Abort> {
        let header = main_theorem_header(self.task, selection).map_err(|e| Abort(e.to_string()))?;
        let guidance = self.config.informal_guidance.then(|| selection.main_informal_proof.clone());
        for _ in 0..self.config.max_main_attempts {
            if self.ledger.is_exhausted() {
                break;
            }
            let a = self.prover_attempt(Stage::MainSketch, &header, guidance.as_deref())?;
            if a.verification.is_proved() {
                return Ok(Some(a.proof_body));
            }
        }
        Ok(None)
    }

    /// Round-robin over unproven lemmas, assembling after every pass that
    /// leaves the proven set complete. Ends in `Solved` or `Exhausted`.
    pub fn lemma_proving_loop(
        &mut self,
        selection: &LemmaSelection,
        proven: &mut ProvenSet,
        main_body: &str,
    ) -> Result<Option<LeanSource>, Abort> {
        let m = selection.m();
        loop {
            for item in &selection.items {
                if proven.contains(item.index) {
                    continue;
                }
                if self.ledger.is_exhausted() {
                    self.enter(PipelinePhase::Exhausted);
                    return Ok(None);
                }
                let header = lemma_theorem_header(self.task, selection, item.index).map_err(|e| Abort(e.to_string()))?;
                let guidance = self.config.informal_guidance.then_some(item.informal_proof.as_str());
                let a = self.prover_attempt(Stage::Lemma(item.index), &header, guidance)?;
                if a.verification.is_proved() {
                    if let Err(e) = proven.insert(item.index, a.proof_body, Provenance::LoopProved) {
                        self.note(e.to_string());
                    }
                }
            }
            if proven.covers(m) {
                self.enter(PipelinePhase::Assembly);
                let source = splice_final_proof(self.task, selection, proven, main_body).map_err(|e| Abort(e.to_string()))?;
                let r = self.check("assembly", &source);
                if r.is_proved() {
                    self.enter(PipelinePhase::Solved);
                    return Ok(Some(source));
                }
                self.note(format!("assembly anomaly: individually verified parts failed together ({})", r.status.as_str()));
                self.enter(PipelinePhase::LemmaLoop);
                self.enter(PipelinePhase::Exhausted);
                return Ok(None);
            }
            if self.ledger.is_exhausted() {
                self.enter(PipelinePhase::Exhausted);
                return Ok(None);
            }
        }
    }

    fn generate_guidance(&mut self) -> (Option<String>, Option<String>) {
        if !self.config.informal_guidance {
            return (None, None);
        }
        let nl = match self.guide.generate_nl_proof(self.task) {
            Ok(p) => Some(p),
            Err(e) => {
                self.note(format!("degraded: no natural-language proof ({e})"));
                None
            }
        };
        let summary = match &nl {
            Some(p) => match self.guide.summarize_nl_proof(self.task, p) {
                Ok(s) => s,
                Err(e) => {
                    self.note(format!("degraded: no summary ({e})"));
                    String::new()
                }
            },
            None => String::new(),
        };
        self.flush_guidance();
        (nl, Some(summary))
    }

    /// Decomposition path after the initial attempts failed. `None` means
    /// take the fallback.
    fn decompose(&mut self, nl_proof: Option<String>) -> Result<Option<LemmaSelection>, Abort> {
        let nl = match nl_proof {
            Some(p) => p,
            // lemma-only mode: the proof feeds selection but is never embedded
            None if !self.config.informal_guidance => {
                let r = self.guide.generate_nl_proof(self.task);
                self.flush_guidance();
                match r {
                    Ok(p) => p,
                    Err(e) => {
                        self.note(format!("no natural-language proof for selection ({e})"));
                        return Ok(None);
                    }
                }
            }
            None => return Ok(None),
        };
        let pool = self.build_lemma_pool();
        if pool.is_empty() {
            self.note("empty lemma pool".into());
            return Ok(None);
        }
        let selection = self.guide.select_lemmas(self.task, &nl, &pool, self.config.max_lemmas);
        self.flush_guidance();
        let selection = match selection {
            Ok(s) if !s.is_empty() => s,
            Ok(_) => {
                self.note("empty selection".into());
                return Ok(None);
            }
            Err(e) => {
                self.note(format!("selection failed ({e})"));
                return Ok(None);
            }
        };
        if !self.config.informal_guidance {
            return Ok(Some(selection));
        }
        let fallback = selection.clone();
        let completed = self.guide.generate_informal_lemma_proofs(self.task, &nl, selection);
        self.flush_guidance();
        Ok(Some(match completed {
            Ok(s) => s,
            Err(e) => {
                self.note(format!("degraded: informal lemma proofs unavailable ({e})"));
                let mut s = fallback;
                let text = sanitize_comment(&nl);
                for it in &mut s.items {
                    it.informal_proof = text.clone();
                }
                s.main_informal_proof = text;
                s.degraded = true;
                s
            }
        }))
    }

    fn outcome(self, solved: Option<(u32, LeanSource)>, infrastructure: Option<String>) -> TheoremOutcome {
        let (solving_attempt_index, final_proof) = match solved {
            Some((i, src)) => (Some(i), Some(src.to_string())),
            None => (None, None),
        };
        TheoremOutcome {
            task: self.task.name.clone(),
            solved: final_proof.is_some(),
            final_status: final_proof.as_ref().map(|_| VerificationStatus::Proved),
            solving_attempt_index,
            final_proof,
            phase_trace: self.trace,
            ledger: self.ledger,
            infrastructure_failure: infrastructure,
            diagnostics: self.diagnostics,
            checks: self.checks,
        }
    }

    fn solved_directly(&self, attempt_index: u32, body: &str) -> (u32, LeanSource) {
        (attempt_index, LeanSource::theorem(&self.task.preamble, &self.task.formal_statement, body))
    }

    /// Drive the full phase machine.
    pub fn run(mut self) -> TheoremOutcome {
        match self.run_phases() {
            Ok(solved) => self.outcome(solved, None),
            Err(Abort(reason)) => {
                let last = self.trace.last().copied();
                if last.is_some_and(|p| p.can_transition_to(PipelinePhase::Exhausted)) {
                    self.enter(PipelinePhase::Exhausted);
                }
                self.note(format!("aborted: {reason}"));
                self.outcome(None, Some(reason))
            }
        }
    }

    fn run_phases(&mut self) -> Result<Option<(u32, LeanSource)>, Abort> {
        self.enter(PipelinePhase::InitialAttempts);
        let (nl, summary) = self.generate_guidance();

        let n = self.config.effective_initial_attempts();
        if let AttemptRun::Solved { attempt_index, proof_body } = self.run_initial_attempts(n, summary.as_deref())? {
            self.enter(PipelinePhase::Solved);
            return Ok(Some(self.solved_directly(attempt_index, &proof_body)));
        }
        if self.ledger.is_exhausted() || !self.config.lemma_guidance {
            self.enter(PipelinePhase::Exhausted);
            return Ok(None);
        }

        self.enter(PipelinePhase::LemmaSelection);
        if let Some(selection) = self.decompose(nl)? {
            self.enter(PipelinePhase::Salvage);
            let mut proven = self.salvage(&selection);
            self.enter(PipelinePhase::MainSketch);
            match self.attempt_main_sketch(&selection)? {
                Some(main_body) => {
                    self.enter(PipelinePhase::LemmaLoop);
                    return Ok(self
                        .lemma_proving_loop(&selection, &mut proven, &main_body)?
                        .map(|src| (self.ledger.consumed, src)));
                }
                None if self.ledger.is_exhausted() => {
                    self.enter(PipelinePhase::Exhausted);
                    return Ok(None);
                }
                None => self.note("main sketch failed, falling back".into()),
            }
        }

        self.enter(PipelinePhase::Fallback);
        match self.fallback_direct(summary.as_deref())? {
            AttemptRun::Solved { attempt_index, proof_body } => {
                self.enter(PipelinePhase::Solved);
                Ok(Some(self.solved_directly(attempt_index, &proof_body)))
            }
            AttemptRun::Unsolved => {
                self.enter(PipelinePhase::Exhausted);
                Ok(None)
            }
        }
    }
}

/// Run one theorem end to end.
pub fn run_pipeline(
    task: &TheoremTask,
    config: &PipelineConfig,
    endpoints: Endpoints<'_>,
    templates: &TemplateSet,
    checker: &mut dyn ProofChecker,
    clock: &dyn Clock,
    sink: &mut dyn RunSink,
) -> TheoremOutcome {
    Pipeline::new(task, config, endpoints, templates, checker, clock, sink).run()
}
