//! Parsers for the structured guidance responses. Both are total: any input
//! yields a value or a [`ParseFailure`].

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseFailure {
    #[error("no CHOSEN LEMMAS section")]
    NoChosenSection,
}

/// One `have l_i : <statement> := by` line from the CHOSEN LEMMAS section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChosenLine {
    pub label: usize,
    pub statement: String,
}

fn chosen_heading() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)chosen\s+lemmas").unwrap())
}

fn chosen_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:[-*+]\s+|\d+[.)]\s+)?`?have\s+l_(\d+)\s*:\s*(.+?)\s*:=\s*by\s*`?\s*$").unwrap())
}

/// Lines of the last CHOSEN LEMMAS section, in response order. Markdown
/// decoration and code fences are tolerated; other lines are ignored.
pub fn parse_chosen_lemmas(response: &str) -> Result<Vec<ChosenLine>, ParseFailure> {
    let start = chosen_heading().find_iter(response).last().ok_or(ParseFailure::NoChosenSection)?.end();
    let section = &response[start..];
    Ok(section
        .lines()
        .filter_map(|l| {
            let c = chosen_line().captures(l)?;
            Some(ChosenLine { label: c[1].parse().ok()?, statement: c[2].trim().to_string() })
        })
        .collect())
}

/// Sections of an informal lemma-proof response.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepProofs {
    /// Proof text per step label; the step statement when no `Proof:` marker.
    pub steps: BTreeMap<usize, String>,
    pub final_proof: Option<String>,
}

fn step_label() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[\s#>*_-]*l_(\d+)[*_]*\s*:[*_]*\s*(.*)$").unwrap())
}

fn proof_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^[\s#>*_-]*proof[*_]*\s*:[*_]*\s*(.*)$").unwrap())
}

fn final_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^[\s#>*_-]*final\s+proof[*_]*\s*:[*_]*\s*(.*)$").unwrap())
}

fn steps_heading() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?im)^[\s#>*_-]*steps[*_]*\s*:").unwrap())
}

enum Slot {
    None,
    Statement(usize),
    Proof(usize),
    Final,
}

/// Parse `l_i:` / `Proof:` / `Final Proof:` sections. The first occurrence
/// of a label wins; text before the STEPS heading is skipped when present.
pub fn parse_step_proofs(response: &str) -> StepProofs {
    let body = match steps_heading().find_iter(response).last() {
        Some(m) => &response[m.end()..],
        None => response,
    };
    let mut statements: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut proofs: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut final_lines: Option<Vec<String>> = None;
    let mut slot = Slot::None;

    for line in body.lines() {
        if let Some(c) = final_marker().captures(line) {
            if final_lines.is_none() {
                final_lines = Some(vec![c[1].to_string()]);
                slot = Slot::Final;
            } else {
                slot = Slot::None;
            }
            continue;
        }
        if let Some(c) = step_label().captures(line) {
            if let Ok(i) = c[1].parse::<usize>() {
                slot = match statements.entry(i) {
                    Entry::Occupied(_) => Slot::None,
                    Entry::Vacant(e) => {
                        e.insert(vec![c[2].to_string()]);
                        Slot::Statement(i)
                    }
                };
                continue;
            }
        }
        if let Some(c) = proof_marker().captures(line) {
            if let Slot::Statement(i) = slot {
                proofs.insert(i, vec![c[1].to_string()]);
                slot = Slot::Proof(i);
                continue;
            }
        }
        match slot {
            Slot::Statement(i) => statements.entry(i).or_default().push(line.to_string()),
            Slot::Proof(i) => proofs.entry(i).or_default().push(line.to_string()),
            Slot::Final => final_lines.get_or_insert_with(Vec::new).push(line.to_string()),
            Slot::None => {}
        }
    }

    let join = |lines: &[String]| lines.join("\n").trim().to_string();
    let steps = statements
        .iter()
        .filter_map(|(i, st)| {
            let text = match proofs.get(i) {
                Some(p) => join(p),
                None => join(st),
            };
            (!text.is_empty()).then_some((*i, text))
        })
        .collect();
    StepProofs { steps, final_proof: final_lines.map(|l| join(&l)).filter(|t| !t.is_empty()) }
}
