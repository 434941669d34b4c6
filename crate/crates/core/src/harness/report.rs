//! Pass@k and the per-component timing report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::RunConfig;
use crate::orchestrator::PipelinePhase;
use crate::task::{AttemptLogLine, GuidanceLogLine, GuidanceTask, TheoremOutcome};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Fraction of outcomes solved within `k` prover calls.
pub fn compute_pass_at_k(outcomes: &[TheoremOutcome], k: u32) -> f64 {
    assert!(k >= 1, "pass@k needs k >= 1");
    if outcomes.is_empty() {
        return 0.0;
    }
    let solved = outcomes.iter().filter(|o| o.solving_attempt_index.is_some_and(|i| i <= k)).count();
    solved as f64 / outcomes.len() as f64
}

/// `curve[j - 1]` is pass@j for j in 1..=budget, in one pass over the outcomes.
pub fn pass_curve(outcomes: &[TheoremOutcome], budget: u32) -> Vec<f64> {
    let mut solved_at = vec![0usize; budget as usize + 1];
    for o in outcomes {
        if let Some(i) = o.solving_attempt_index.filter(|&i| i >= 1 && i <= budget) {
            solved_at[i as usize] += 1;
        }
    }
    let n = outcomes.len().max(1) as f64;
    let mut acc = 0;
    solved_at[1..]
        .iter()
        .map(|c| {
            acc += c;
            acc as f64 / n
        })
        .collect()
}

/// Mean seconds of one kind of call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentTiming {
    pub calls: u64,
    pub total_seconds: f64,
    pub mean_seconds: f64,
}

impl ComponentTiming {
    fn add(&mut self, seconds: f64) {
        self.calls += 1;
        self.total_seconds += seconds;
    }

    fn finish(mut self) -> Self {
        self.mean_seconds = if self.calls == 0 { 0.0 } else { self.total_seconds / self.calls as f64 };
        self
    }
}

/// Prover calls of one stage, split into generation and verification.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AttemptTiming {
    pub calls: u64,
    pub mean_generation_seconds: f64,
    pub mean_verification_seconds: f64,
}

/// The three groups of the timing breakdown: guidance done once per theorem,
/// lemma processing done only after the initial attempts fail, and the cost
/// of each prover attempt by stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub one_time_guidance: BTreeMap<String, ComponentTiming>,
    pub lemma_processing: BTreeMap<String, ComponentTiming>,
    pub prover_attempts: BTreeMap<String, AttemptTiming>,
}

impl TimingReport {
    pub fn build(outcomes: &[TheoremOutcome], attempts: &[AttemptLogLine], guidance: &[GuidanceLogLine]) -> Self {
        let mut one_time = BTreeMap::new();
        let mut lemma = BTreeMap::new();
        for task in GuidanceTask::ALL {
            let bucket = match task {
                GuidanceTask::NlProof | GuidanceTask::Summary => &mut one_time,
                GuidanceTask::Selection | GuidanceTask::LemmaProofs => &mut lemma,
            };
            bucket.insert(task.as_str().to_string(), ComponentTiming::default());
        }
        for g in guidance {
            let bucket = match g.task {
                GuidanceTask::NlProof | GuidanceTask::Summary => &mut one_time,
                GuidanceTask::Selection | GuidanceTask::LemmaProofs => &mut lemma,
            };
            bucket.get_mut(g.task.as_str()).expect("all tasks present").add(g.seconds);
        }
        for kind in ["syntax_check", "salvage", "assembly"] {
            let mut t = ComponentTiming::default();
            for o in outcomes {
                if let Some(c) = o.checks.get(kind) {
                    t.calls += c.count as u64;
                    t.total_seconds += c.seconds;
                }
            }
            lemma.insert(kind.to_string(), t);
        }

        let mut sums: BTreeMap<String, (u64, f64, f64)> = ["initial", "main_sketch", "lemma", "fallback"]
            .into_iter()
            .map(|s| (s.to_string(), (0, 0.0, 0.0)))
            .collect();
        for a in attempts {
            let e = sums.entry(a.stage.category().to_string()).or_default();
            e.0 += 1;
            e.1 += a.gen_seconds;
            e.2 += a.verify_seconds;
        }
        let prover_attempts = sums
            .into_iter()
            .map(|(k, (n, g, v))| {
                let d = n.max(1) as f64;
                (k, AttemptTiming { calls: n, mean_generation_seconds: g / d, mean_verification_seconds: v / d })
            })
            .collect();
        Self {
            one_time_guidance: one_time.into_iter().map(|(k, t)| (k, t.finish())).collect(),
            lemma_processing: lemma.into_iter().map(|(k, t)| (k, t.finish())).collect(),
            prover_attempts,
        }
    }
}

/// Compact per-theorem line of the report; the full outcome lives in
/// `outcomes.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub theorem: String,
    pub solved: bool,
    pub solving_attempt_index: Option<u32>,
    pub consumed: u32,
    pub final_phase: Option<PipelinePhase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infrastructure_failure: Option<String>,
}

impl From<&TheoremOutcome> for OutcomeSummary {
    fn from(o: &TheoremOutcome) -> Self {
        Self {
            theorem: o.task.clone(),
            solved: o.solved,
            solving_attempt_index: o.solving_attempt_index,
            consumed: o.ledger.consumed,
            final_phase: o.phase_trace.last().copied(),
            infrastructure_failure: o.infrastructure_failure.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelIds {
    pub reasoner: String,
    pub worker: String,
    pub prover: String,
    pub toolchain: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config_hash: String,
    pub theorems: usize,
    pub solved: usize,
    pub infrastructure_failures: usize,
    pub budget: u32,
    /// pass@k for the requested k, keyed by k.
    pub pass_at_k: BTreeMap<u32, f64>,
    /// Entry `j - 1` is pass@j.
    pub pass_curve: Vec<f64>,
    pub mean_prover_calls: f64,
    pub timings: TimingReport,
    pub models: ModelIds,
    pub config: RunConfig,
    pub outcomes: Vec<OutcomeSummary>,
}

impl RunReport {
    pub fn build(
        config: &RunConfig,
        outcomes: &[TheoremOutcome],
        attempts: &[AttemptLogLine],
        guidance: &[GuidanceLogLine],
        ks: &[u32],
    ) -> Self {
        let budget = config.pipeline.budget;
        let n = outcomes.len();
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            config_hash: config.hash(),
            theorems: n,
            solved: outcomes.iter().filter(|o| o.solved).count(),
            infrastructure_failures: outcomes.iter().filter(|o| o.infrastructure_failure.is_some()).count(),
            budget,
            pass_at_k: ks.iter().filter(|&&k| k >= 1).map(|&k| (k, compute_pass_at_k(outcomes, k))).collect(),
            pass_curve: pass_curve(outcomes, budget),
            mean_prover_calls: outcomes.iter().map(|o| o.ledger.consumed as f64).sum::<f64>() / n.max(1) as f64,
            timings: TimingReport::build(outcomes, attempts, guidance),
            models: ModelIds {
                reasoner: config.endpoints.reasoner.model.clone(),
                worker: config.endpoints.worker.model.clone(),
                prover: config.endpoints.prover.model.clone(),
                toolchain: config.verifier.toolchain.clone(),
            },
            config: config.clone(),
            outcomes: outcomes.iter().map(OutcomeSummary::from).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fixed-width text rendering for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theorems   {}", self.theorems);
        let _ = writeln!(out, "solved     {} ({:.1}%)", self.solved, pct(self.solved, self.theorems));
        if self.infrastructure_failures > 0 {
            let _ = writeln!(out, "aborted    {} (infrastructure failure)", self.infrastructure_failures);
        }
        let _ = writeln!(out, "budget     {}", self.budget);
        let _ = writeln!(out, "mean calls {:.2}", self.mean_prover_calls);
        out.push('\n');
        for (k, v) in &self.pass_at_k {
            let _ = writeln!(out, "pass@{k:<5} {:.4}", v);
        }
        out.push('\n');
        let _ = writeln!(out, "{:<28} {:>7} {:>10} {:>10}", "component", "calls", "mean s", "total s");
        let mut row = |group: &str, name: &str, t: &ComponentTiming| {
            let _ = writeln!(out, "{:<28} {:>7} {:>10.2} {:>10.2}", format!("{group}/{name}"), t.calls, t.mean_seconds, t.total_seconds);
        };
        for (name, t) in &self.timings.one_time_guidance {
            row("guidance", name, t);
        }
        for (name, t) in &self.timings.lemma_processing {
            row("lemma", name, t);
        }
        out.push('\n');
        let _ = writeln!(out, "{:<28} {:>7} {:>10} {:>10}", "prover stage", "calls", "gen s", "verify s");
        for (name, t) in &self.timings.prover_attempts {
            let _ = writeln!(
                out,
                "{:<28} {:>7} {:>10.2} {:>10.2}",
                name, t.calls, t.mean_generation_seconds, t.mean_verification_seconds
            );
        }
        out
    }
}

fn pct(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        100.0 * a as f64 / b as f64
    }
}
