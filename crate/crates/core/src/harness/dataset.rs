//! JSONL benchmark files: one theorem per line.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::{TaskError, TheoremTask};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate theorem name `{name}` on lines {first} and {second}")]
    DuplicateName { name: String, first: usize, second: usize },
    #[error("line {line}: invalid formal statement: {source}")]
    InvalidStatement { line: usize, source: TaskError },
    #[error("dataset is empty")]
    Empty,
}

/// One benchmark problem. Unknown keys such as `split` are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub formal_statement: String,
    pub informal_statement: String,
    /// Replaces the run-wide preamble for this entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<String>,
}

impl DatasetEntry {
    pub fn to_task(&self, default_preamble: &str) -> Result<TheoremTask, TaskError> {
        TheoremTask::new(
            &self.name,
            strip_proof_opener(&self.formal_statement),
            &self.informal_statement,
            self.header.as_deref().unwrap_or(default_preamble),
        )
    }
}

/// Benchmark files usually end statements with `:= by` ready for a proof;
/// the pipeline appends its own.
fn strip_proof_opener(stmt: &str) -> &str {
    let t = stmt.trim_end();
    let t = t.strip_suffix("by").map(str::trim_end).filter(|s| s.ends_with(":=")).unwrap_or(t);
    t.strip_suffix(":=").map(str::trim_end).unwrap_or(t)
}

pub fn parse_dataset(text: &str) -> Result<Vec<DatasetEntry>, DatasetError> {
    let mut entries = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let entry: DatasetEntry =
            serde_json::from_str(raw).map_err(|e| DatasetError::Parse { line, reason: e.to_string() })?;
        if entry.name.trim().is_empty() {
            return Err(DatasetError::Parse { line, reason: "empty name".into() });
        }
        if let Some(&first) = seen.get(&entry.name) {
            return Err(DatasetError::DuplicateName { name: entry.name, first, second: line });
        }
        entry.to_task("").map_err(|source| DatasetError::InvalidStatement { line, source })?;
        seen.insert(entry.name.clone(), line);
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(entries)
}

pub fn load_dataset(path: &Path) -> Result<Vec<DatasetEntry>, DatasetError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    parse_dataset(&text)
}
