//! Synthesis of derived theorem statements and the final spliced proof.

use std::fmt;

use super::{indent, split_statement, LeanSyntaxError, StatementSplit};
use crate::lean::rename::selection_binder;
use crate::task::{LemmaSelection, ProvenSet, TheoremTask};

/// A complete Lean source unit: the import preamble plus one declaration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeanSource {
    pub preamble: String,
    pub body: String,
}

impl LeanSource {
    pub fn new(preamble: impl Into<String>, body: impl Into<String>) -> Self {
        Self { preamble: preamble.into(), body: body.into() }
    }

    /// `<header> := by` followed by `proof` indented one level.
    pub fn theorem(preamble: &str, header: &str, proof: &str) -> Self {
        Self::new(preamble, format!("{header} := by\n{}", indent(proof, 2)))
    }
}

impl fmt::Display for LeanSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.preamble.trim().is_empty() {
            f.write_str(&self.body)
        } else {
            write!(f, "{}\n{}", self.preamble.trim_end(), self.body)
        }
    }
}

/// Keeps continuation lines of a multi-line statement to the right of `col`.
fn inline_statement(stmt: &str, col: usize) -> String {
    let mut lines = stmt.lines();
    let mut out = lines.next().unwrap_or_default().trim().to_string();
    for l in lines {
        out.push('\n');
        out.push_str(&" ".repeat(col));
        out.push_str(l.trim());
    }
    out
}

fn join_header(parts: &[&str]) -> String {
    parts.iter().filter(|p| !p.is_empty()).copied().collect::<Vec<_>>().join(" ")
}

fn derived_header(
    split: &StatementSplit,
    name: &str,
    hypotheses: &[String],
    goal: &str,
) -> String {
    let hyps = hypotheses.join(" ");
    // examples carry no name
    let name = if split.keyword == "example" { "" } else { name };
    let head = join_header(&[&split.keyword, name, &split.binders, &hyps]);
    format!("{head} : {}", inline_statement(goal, 4))
}

fn lemma_hypotheses(selection: &LemmaSelection, upto: usize) -> Vec<String> {
    selection.items[..upto]
        .iter()
        .map(|it| format!("({} : {})", selection_binder(it.index), inline_statement(&it.lemma.statement_text, 4)))
        .collect()
}

/// `<preamble>\n<formal_statement> := by\n  /- <summary> -/\n`
pub fn embed_summary(formal_statement: &str, preamble: &str, summary: &str) -> Result<String, LeanSyntaxError> {
    embed_guidance(formal_statement, preamble, Some(summary))
}

/// Prover code prefix for `header`, with an informal proof comment when given.
pub fn embed_guidance(header: &str, preamble: &str, summary: Option<&str>) -> Result<String, LeanSyntaxError> {
    let body = match summary {
        Some(s) if s.contains("-/") || s.contains("/-") => return Err(LeanSyntaxError::EmbeddingUnsafe),
        Some(s) => format!("{header} := by\n  /- {s} -/\n"),
        None => format!("{header} := by\n"),
    };
    Ok(LeanSource::new(preamble, body).to_string())
}

pub fn lemma_theorem_header(task: &TheoremTask, selection: &LemmaSelection, i: usize) -> Result<String, LeanSyntaxError> {
    if i >= selection.m() {
        return Err(LeanSyntaxError::LemmaIndex { index: i, len: selection.m() });
    }
    let split = split_statement(&task.formal_statement)?;
    let name = format!("{}_lemma_{i}", task.ident());
    Ok(derived_header(&split, &name, &lemma_hypotheses(selection, i), &selection.items[i].lemma.statement_text))
}

/// Lemma `i` as a theorem: global binders, lemmas `0..i` as hypotheses, lemma `i` as goal.
pub fn build_lemma_theorem(task: &TheoremTask, selection: &LemmaSelection, i: usize) -> Result<LeanSource, LeanSyntaxError> {
    Ok(LeanSource::new(&task.preamble, lemma_theorem_header(task, selection, i)?))
}

pub fn main_theorem_header(task: &TheoremTask, selection: &LemmaSelection) -> Result<String, LeanSyntaxError> {
    if selection.is_empty() {
        return Err(LeanSyntaxError::EmptySelection);
    }
    let split = split_statement(&task.formal_statement)?;
    let name = format!("{}_main", task.ident());
    Ok(derived_header(&split, &name, &lemma_hypotheses(selection, selection.m()), &split.goal_segment))
}

/// The original theorem with every selected lemma appended as a hypothesis.
pub fn build_main_theorem(task: &TheoremTask, selection: &LemmaSelection) -> Result<LeanSource, LeanSyntaxError> {
    Ok(LeanSource::new(&task.preamble, main_theorem_header(task, selection)?))
}

/// `<binders> : <statement> := by sorry` under a fresh name.
pub fn syntax_check_source(task: &TheoremTask, statement: &str) -> Result<LeanSource, LeanSyntaxError> {
    let split = split_statement(&task.formal_statement)?;
    let header = derived_header(&split, &format!("{}_syntax_check", task.ident()), &[], statement);
    Ok(LeanSource::new(&task.preamble, format!("{header} := by sorry")))
}

/// `statement` proved by `proof` under the task's global binders only.
pub fn salvage_source(task: &TheoremTask, statement: &str, proof: &str) -> Result<LeanSource, LeanSyntaxError> {
    let split = split_statement(&task.formal_statement)?;
    let header = derived_header(&split, &format!("{}_salvage", task.ident()), &[], statement);
    Ok(LeanSource::theorem(&task.preamble, &header, proof))
}

/// The complete proof: one `have l_i` block per lemma, then the main body.
pub fn splice_final_proof(
    task: &TheoremTask,
    selection: &LemmaSelection,
    proven: &ProvenSet,
    main_proof_body: &str,
) -> Result<LeanSource, LeanSyntaxError> {
    if main_proof_body.trim().is_empty() {
        return Err(LeanSyntaxError::EmptyMainProof);
    }
    let mut proof = String::new();
    for it in &selection.items {
        let entry = proven.get(it.index).ok_or(LeanSyntaxError::MissingLemmaProof(it.index))?;
        proof.push_str(&format!(
            "have {} : {} := by\n{}\n",
            selection_binder(it.index),
            inline_statement(&it.lemma.statement_text, 4),
            indent(&entry.proof_text, 2)
        ));
    }
    proof.push_str(main_proof_body);
    Ok(LeanSource::theorem(&task.preamble, &task.formal_statement, &proof))
}
