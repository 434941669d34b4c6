//! A five-theorem mock benchmark written to disk: dataset, scripts, config.

use std::path::{Path, PathBuf};

use guided_prover::model::ScriptEntry;
use serde_json::json;

use super::scenarios::{lemma_proofs_response, selection_response, FAIL, NL_PROOF, OK, SUMMARY, WITH_HAVES};

pub const NAMES: [&str; 5] = ["alpha", "beta", "gamma", "delta", "epsilon"];

pub fn statement(name: &str) -> String {
    format!("theorem {name} (x : ℝ) (h : 3 * x + 2 = 11) : x = 3 := by")
}

fn prover_script(name: &str) -> Vec<&'static str> {
    match name {
        // solved by the first initial attempt
        "alpha" => vec![OK],
        "beta" => vec![FAIL, OK],
        // decomposition: h1 salvaged, main sketch and two lemmas prove
        "gamma" => vec![WITH_HAVES, FAIL, OK, OK, OK],
        // nothing to extract, fallback burns the rest
        "delta" => vec![FAIL; 8],
        // main sketch never proves
        "epsilon" => [vec![WITH_HAVES, WITH_HAVES], vec![FAIL; 6]].concat(),
        _ => unreachable!(),
    }
}

pub struct Bench {
    pub dir: PathBuf,
    pub dataset: PathBuf,
    pub config: PathBuf,
}

fn write_script(path: &Path, entries: &[ScriptEntry]) {
    let text: String = entries.iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect();
    std::fs::write(path, text).unwrap();
}

/// Write the benchmark into `dir`. `extra` is prepended to the config file.
pub fn write(dir: &Path, extra: &str) -> Bench {
    let mut dataset = String::new();
    let (mut reasoner, mut worker, mut prover) = (vec![], vec![], vec![]);
    for name in NAMES {
        dataset.push_str(
            &json!({"name": name, "formal_statement": statement(name), "informal_statement": "If 3x + 2 = 11 then x = 3."})
                .to_string(),
        );
        dataset.push('\n');
        reasoner.push(ScriptEntry::for_theorem(name, NL_PROOF));
        worker.push(ScriptEntry::for_theorem(name, SUMMARY));
        if matches!(name, "gamma" | "epsilon") {
            worker.push(ScriptEntry::for_theorem(name, selection_response(&["3 * x = 9", "x = 9 / 3", "x > 0"])));
            worker.push(ScriptEntry::for_theorem(name, lemma_proofs_response(3)));
        }
        prover.extend(prover_script(name).into_iter().map(|t| ScriptEntry::for_theorem(name, t)));
    }
    std::fs::write(dir.join("dataset.jsonl"), dataset).unwrap();
    write_script(&dir.join("reasoner.jsonl"), &reasoner);
    write_script(&dir.join("worker.jsonl"), &worker);
    write_script(&dir.join("prover.jsonl"), &prover);
    let config = format!(
        r#"{extra}
budget = 8
initial_attempts = 2
clock = "simulated"
tick_ms = 250
preamble = "import Mathlib"

[endpoints.reasoner]
base_url = "mock:reasoner.jsonl"
model = "mock-reasoner"

[endpoints.worker]
base_url = "mock:worker.jsonl"
model = "mock-worker"

[endpoints.prover]
base_url = "mock:prover.jsonl"
model = "mock-prover"

[verifier]
kind = "mock"
toolchain = "mock"
"#
    );
    std::fs::write(dir.join("config.toml"), config).unwrap();
    Bench { dir: dir.to_path_buf(), dataset: dir.join("dataset.jsonl"), config: dir.join("config.toml") }
}

/// Report JSON with the scratch directory replaced by a stable token.
pub fn portable(report_json: &str, dir: &Path) -> String {
    report_json.replace(&dir.display().to_string(), "<DIR>")
}
