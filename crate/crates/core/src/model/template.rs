//! Prompt templates with `{name}` placeholders.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("missing bindings for placeholders: {}", .0.join(", "))]
    MissingBinding(Vec<String>),
    #[error("cannot read template override {path}: {reason}")]
    Override { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    NlProof,
    SummarizeSystem,
    SummarizeUser,
    SelectSystem,
    SelectUser,
    LemmaProofsSystem,
    LemmaProofsUser,
    ProverCot,
}

impl TemplateId {
    pub const ALL: [TemplateId; 8] = [
        TemplateId::NlProof,
        TemplateId::SummarizeSystem,
        TemplateId::SummarizeUser,
        TemplateId::SelectSystem,
        TemplateId::SelectUser,
        TemplateId::LemmaProofsSystem,
        TemplateId::LemmaProofsUser,
        TemplateId::ProverCot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NlProof => "nl_proof",
            Self::SummarizeSystem => "summarize_system",
            Self::SummarizeUser => "summarize_user",
            Self::SelectSystem => "select_system",
            Self::SelectUser => "select_user",
            Self::LemmaProofsSystem => "lemma_proofs_system",
            Self::LemmaProofsUser => "lemma_proofs_user",
            Self::ProverCot => "prover_cot",
        }
    }

    /// Text shipped with the crate.
    pub fn builtin(self) -> &'static str {
        match self {
            Self::NlProof => include_str!("../../templates/nl_proof.txt"),
            Self::SummarizeSystem => include_str!("../../templates/summarize_system.txt"),
            Self::SummarizeUser => include_str!("../../templates/summarize_user.txt"),
            Self::SelectSystem => include_str!("../../templates/select_system.txt"),
            Self::SelectUser => include_str!("../../templates/select_user.txt"),
            Self::LemmaProofsSystem => include_str!("../../templates/lemma_proofs_system.txt"),
            Self::LemmaProofsUser => include_str!("../../templates/lemma_proofs_user.txt"),
            // the prover's published chain-of-thought activation prompt
            Self::ProverCot => include_str!("../../templates/prover_cot.txt"),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").unwrap())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub text: String,
}

impl PromptTemplate {
    pub fn builtin(id: TemplateId) -> Self {
        Self { id, text: id.builtin().to_string() }
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        placeholder_re()
            .captures_iter(&self.text)
            .map(|c| c[1].to_string())
            .filter(|n| seen.insert(n.clone()))
            .collect()
    }

    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        render(&self.text, bindings)
    }
}

/// Substitute every `{name}` in one pass. Bound values are inserted verbatim
/// and never rescanned.
pub fn render(template: &str, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
    let lookup = |name: &str| bindings.iter().find(|(k, _)| *k == name).map(|(_, v)| *v);
    let mut missing: Vec<String> = placeholder_re()
        .captures_iter(template)
        .map(|c| c[1].to_string())
        .filter(|n| lookup(n).is_none())
        .collect();
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(TemplateError::MissingBinding(missing));
    }
    Ok(placeholder_re()
        .replace_all(template, |c: &regex::Captures| lookup(&c[1]).unwrap_or_default().to_string())
        .into_owned())
}

/// The full template set, optionally overridden from a directory of
/// `<id>.txt` files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: Vec<PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self { templates: TemplateId::ALL.iter().map(|&id| PromptTemplate::builtin(id)).collect() }
    }
}

impl TemplateSet {
    pub fn with_overrides(dir: &Path) -> Result<Self, TemplateError> {
        let mut set = Self::default();
        for t in &mut set.templates {
            let path = dir.join(format!("{}.txt", t.id));
            if path.exists() {
                t.text = std::fs::read_to_string(&path).map_err(|e| TemplateError::Override {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
            }
        }
        Ok(set)
    }

    pub fn get(&self, id: TemplateId) -> &PromptTemplate {
        self.templates.iter().find(|t| t.id == id).expect("every id is present")
    }

    pub fn render(&self, id: TemplateId, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        self.get(id).render(bindings)
    }
}

/// The pool enumerated one lemma per line as `i: statement`.
pub fn enumerate_lemmas<'a>(statements: impl IntoIterator<Item = &'a str>) -> String {
    statements
        .into_iter()
        .enumerate()
        .map(|(i, s)| format!("{i}: {}", crate::lean::normalize_statement(s)))
        .collect::<Vec<_>>()
        .join("\n")
}
