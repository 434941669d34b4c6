//! The guidance procedures: natural-language proof, summary, lemma selection
//! and informal lemma proofs.

mod parse;

use thiserror::Error;

pub use parse::{parse_chosen_lemmas, parse_step_proofs, ChosenLine, ParseFailure, StepProofs};

use crate::clock::{timed, Clock};
use crate::lean::{normalize_statement, rename_binders, sanitize_comment, LeanSyntaxError};
use crate::model::{enumerate_lemmas, ChatMessage, CompletionRequest, ModelClient, ModelError, TemplateError, TemplateId, TemplateSet};
use crate::task::{referenced_lemma_indices, GuidanceTask, Lemma, LemmaSelection, SyntaxValidity, TheoremTask};

pub const SUMMARY_OPENERS: [&str; 4] = ["We want to show that", "We have", "We need to show that", "To show that"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuidanceError {
    #[error("guidance unavailable: {0}")]
    Unavailable(#[from] ModelError),
    #[error("guidance model returned an empty response twice")]
    EmptyResponse,
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("selection precondition violated: {0}")]
    Precondition(&'static str),
}

/// One guidance-model call, successful or not.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceCall {
    pub task: GuidanceTask,
    pub seconds: f64,
    /// Raw response; empty when the call failed.
    pub response: String,
}

/// Guidance endpoints plus the record of every call made through them.
pub struct Guide<'a> {
    pub reasoner: &'a dyn ModelClient,
    pub worker: &'a dyn ModelClient,
    pub templates: &'a TemplateSet,
    pub clock: &'a dyn Clock,
    pub calls: Vec<GuidanceCall>,
    pub warnings: Vec<String>,
}

impl<'a> Guide<'a> {
    pub fn new(
        reasoner: &'a dyn ModelClient,
        worker: &'a dyn ModelClient,
        templates: &'a TemplateSet,
        clock: &'a dyn Clock,
    ) -> Self {
        Self { reasoner, worker, templates, clock, calls: Vec::new(), warnings: Vec::new() }
    }

    fn warn(&mut self, text: String) {
        tracing::warn!("{text}");
        self.warnings.push(text);
    }

    fn call(
        &mut self,
        client: &dyn ModelClient,
        task: GuidanceTask,
        theorem: &str,
        messages: Vec<ChatMessage>,
    ) -> Result<String, GuidanceError> {
        let request = CompletionRequest::new(theorem, messages);
        let (result, seconds) = timed(self.clock, || client.complete(&request));
        let response = result.as_ref().map(|c| c.text.clone()).unwrap_or_default();
        self.calls.push(GuidanceCall { task, seconds, response });
        Ok(result?.text)
    }

    /// Call, re-asking once when the response is blank.
    fn call_non_empty(
        &mut self,
        client: &dyn ModelClient,
        task: GuidanceTask,
        theorem: &str,
        messages: Vec<ChatMessage>,
    ) -> Result<String, GuidanceError> {
        for _ in 0..2 {
            let text = self.call(client, task, theorem, messages.clone())?;
            if !text.trim().is_empty() {
                return Ok(text);
            }
        }
        Err(GuidanceError::EmptyResponse)
    }

    /// Full natural-language proof from the reasoner.
    pub fn generate_nl_proof(&mut self, task: &TheoremTask) -> Result<String, GuidanceError> {
        let prompt = self.templates.render(
            TemplateId::NlProof,
            &[("formal_statement", &task.formal_statement), ("informal_statement", &task.informal_statement)],
        )?;
        self.call_non_empty(self.reasoner, GuidanceTask::NlProof, &task.name, vec![ChatMessage::user(prompt)])
    }

    /// Concise summary, made safe for a block comment.
    pub fn summarize_nl_proof(&mut self, task: &TheoremTask, nl_proof: &str) -> Result<String, GuidanceError> {
        let system = self.templates.render(TemplateId::SummarizeSystem, &[])?;
        let user = self.templates.render(
            TemplateId::SummarizeUser,
            &[
                ("formal_statement", &task.formal_statement),
                ("informal_statement", &task.informal_statement),
                ("nl_proof", nl_proof),
            ],
        )?;
        let raw = self.call_non_empty(
            self.worker,
            GuidanceTask::Summary,
            &task.name,
            vec![ChatMessage::system(system), ChatMessage::user(user)],
        )?;
        let summary = sanitize_comment(raw.trim());
        let head = summary.trim_start_matches(['*', '#', ' ', '"', '\'']);
        if !SUMMARY_OPENERS.iter().any(|o| head.starts_with(o)) {
            self.warn(format!("{}: summary does not start with a prescribed opener", task.name));
        }
        Ok(summary)
    }

    /// Choose at most `k` lemmas from `pool`. The response only points into
    /// the pool; statements are matched by normalized text. A response
    /// without a CHOSEN LEMMAS section is re-asked once, then the selection
    /// is empty.
    pub fn select_lemmas(
        &mut self,
        task: &TheoremTask,
        nl_proof: &str,
        pool: &[Lemma],
        k: usize,
    ) -> Result<LemmaSelection, GuidanceError> {
        if pool.is_empty() || k == 0 {
            return Err(GuidanceError::Precondition("selection needs a non-empty pool and k >= 1"));
        }
        let system = self.templates.render(TemplateId::SelectSystem, &[])?;
        let lemmas = enumerate_lemmas(pool.iter().map(|l| l.statement_text.as_str()));
        let user = self.templates.render(
            TemplateId::SelectUser,
            &[
                ("formal_statement", &task.formal_statement),
                ("informal_statement", &task.informal_statement),
                ("nl_proof", nl_proof),
                ("lemmas", &lemmas),
            ],
        )?;
        let messages = vec![ChatMessage::system(system), ChatMessage::user(user)];

        let mut chosen = None;
        for _ in 0..2 {
            let response = self.call(self.worker, GuidanceTask::Selection, &task.name, messages.clone())?;
            match parse_chosen_lemmas(&response) {
                Ok(lines) => {
                    chosen = Some(lines);
                    break;
                }
                Err(e) => self.warn(format!("{}: {e}", task.name)),
            }
        }
        let Some(lines) = chosen else {
            return Ok(LemmaSelection::default());
        };

        let mut picked: Vec<Lemma> = Vec::new();
        for line in lines {
            if picked.len() == k {
                self.warn(format!("{}: selection longer than k = {k}, truncated", task.name));
                break;
            }
            match match_pool(pool, &line.statement) {
                Some(lemma) if picked.iter().any(|p| p.normalized_statement() == lemma.normalized_statement()) => {}
                Some(lemma) => picked.push(lemma.clone()),
                None => self.warn(format!("{}: chosen lemma `{}` is not in the pool", task.name, line.statement)),
            }
        }

        loop {
            match rename_binders(picked.clone()) {
                Ok(renamed) => return Ok(LemmaSelection::from_lemmas(renamed)),
                Err(LeanSyntaxError::BinderCollision { lemma, token }) => {
                    self.warn(format!("{}: dropped lemma using `{token}`", task.name));
                    picked.remove(lemma);
                }
                Err(other) => unreachable!("rename only reports collisions: {other}"),
            }
        }
    }

    /// Attach informal proofs for every selected lemma and the main proof.
    /// Sections still missing after one re-ask fall back to `nl_proof`.
    pub fn generate_informal_lemma_proofs(
        &mut self,
        task: &TheoremTask,
        nl_proof: &str,
        mut selection: LemmaSelection,
    ) -> Result<LemmaSelection, GuidanceError> {
        if selection.is_empty() {
            return Err(GuidanceError::Precondition("informal lemma proofs need m >= 1"));
        }
        let m = selection.m();
        let system = self.templates.render(TemplateId::LemmaProofsSystem, &[])?;
        let lemmas = selection
            .items
            .iter()
            .map(|it| format!("have {} : {}", it.lemma.binder_name, normalize_statement(&it.lemma.statement_text)))
            .collect::<Vec<_>>()
            .join("\n");
        let user = self.templates.render(
            TemplateId::LemmaProofsUser,
            &[
                ("formal_statement", &task.formal_statement),
                ("informal_statement", &task.informal_statement),
                ("nl_proof", nl_proof),
                ("lemmas", &lemmas),
            ],
        )?;
        let messages = vec![ChatMessage::system(system), ChatMessage::user(user)];

        let complete = |p: &StepProofs| (0..m).all(|i| p.steps.contains_key(&i)) && p.final_proof.is_some();
        let mut best = StepProofs::default();
        for _ in 0..2 {
            let response = self.call(self.worker, GuidanceTask::LemmaProofs, &task.name, messages.clone())?;
            let parsed = parse_step_proofs(&response);
            let better = parsed.steps.len() + parsed.final_proof.is_some() as usize
                > best.steps.len() + best.final_proof.is_some() as usize;
            if better {
                best = parsed;
            }
            if complete(&best) {
                break;
            }
        }

        for it in &mut selection.items {
            match best.steps.get(&it.index) {
                Some(text) => {
                    if !referenced_lemma_indices(text).is_empty() {
                        self.warn(format!("{}: informal proof of {} names a lemma label", task.name, it.lemma.binder_name));
                    }
                    it.informal_proof = sanitize_comment(text);
                }
                None => {
                    self.warn(format!("{}: no informal proof for {}, using the full proof", task.name, it.lemma.binder_name));
                    it.informal_proof = sanitize_comment(nl_proof);
                    selection.degraded = true;
                }
            }
        }
        selection.main_informal_proof = match best.final_proof {
            Some(text) => sanitize_comment(&text),
            None => {
                self.warn(format!("{}: no final proof section, using the full proof", task.name));
                selection.degraded = true;
                sanitize_comment(nl_proof)
            }
        };
        Ok(selection)
    }
}

/// The pool entry a chosen statement points at: exact normalized match
/// first, then a match ignoring all whitespace.
fn match_pool<'p>(pool: &'p [Lemma], statement: &str) -> Option<&'p Lemma> {
    let norm = normalize_statement(statement);
    let squeeze = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    pool.iter()
        .filter(|l| l.syntax_valid != SyntaxValidity::Invalid)
        .find(|l| l.normalized_statement() == norm)
        .or_else(|| {
            let target = squeeze(&norm);
            pool.iter().filter(|l| l.syntax_valid != SyntaxValidity::Invalid).find(|l| squeeze(l.normalized_statement()) == target)
        })
}
