mod support;

use std::fs;
use std::path::Path;
use std::sync::Arc;

use guided_prover::harness::{
    self, load_dataset, report_from_dir, run_benchmark, run_benchmark_with, Clients, HarnessError, RunConfig,
    RunOptions, ATTEMPTS_LOG, GUIDANCE_LOG, GUIDANCE_RAW_LOG, OUTCOMES_LOG, REPORT_JSON,
};
use guided_prover::model::{Role, ScriptedClient};
use guided_prover::task::{AttemptLogLine, TheoremOutcome};
use guided_prover::verifier::VerifierConfig;
use support::bench;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_report.json");

fn setup(extra: &str) -> (tempfile::TempDir, bench::Bench, RunConfig) {
    let dir = tempfile::tempdir().unwrap();
    let b = bench::write(dir.path(), extra);
    let config = RunConfig::load(&b.config).unwrap();
    (dir, b, config)
}

fn run(b: &bench::Bench, config: &RunConfig, out: &str, resume: bool) -> harness::RunResult {
    let entries = load_dataset(&b.dataset).unwrap();
    let mut opts = RunOptions::new(b.dir.join(out));
    opts.resume = resume;
    run_benchmark(config, &entries, &opts).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn three_of_five_solve() {
    let (_tmp, b, config) = setup("");
    let r = run(&b, &config, "out", false).report;
    assert_eq!(r.theorems, 5);
    assert_eq!(r.solved, 3);
    assert_eq!(r.pass_curve.len(), 8);
    assert_eq!(r.pass_curve[7], 0.6);
    assert_eq!(r.pass_curve, [0.2, 0.4, 0.4, 0.4, 0.6, 0.6, 0.6, 0.6]);
    let idx: Vec<_> = r.outcomes.iter().map(|o| o.solving_attempt_index).collect();
    assert_eq!(idx, [Some(1), Some(2), Some(5), None, None]);
    let consumed: Vec<_> = r.outcomes.iter().map(|o| o.consumed).collect();
    assert_eq!(consumed, [1, 2, 5, 8, 8]);
    assert_eq!(r.infrastructure_failures, 0);
}

#[test]
fn report_matches_golden_file() {
    let (_tmp, b, config) = setup("");
    let result = run(&b, &config, "out", false);
    // the hash covers the absolute script paths, so it is checked here and masked below
    assert_eq!(result.report.config_hash, config.hash());
    let raw = read(&b.dir.join("out"), REPORT_JSON);
    let got = bench::portable(&raw.replace(&config.hash(), "<HASH>"), &b.dir);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(GOLDEN, &got).unwrap();
    }
    assert_eq!(got, fs::read_to_string(GOLDEN).unwrap());
}

#[test]
fn timing_fields_follow_the_three_way_split() {
    let (_tmp, b, config) = setup("");
    let r = run(&b, &config, "out", false).report;
    let t = &r.timings;
    assert_eq!(t.one_time_guidance.keys().collect::<Vec<_>>(), ["nl_proof", "summary"]);
    assert_eq!(
        t.lemma_processing.keys().collect::<Vec<_>>(),
        ["assembly", "lemma_proofs", "salvage", "selection", "syntax_check"]
    );
    assert_eq!(t.prover_attempts.keys().collect::<Vec<_>>(), ["fallback", "initial", "lemma", "main_sketch"]);
    assert_eq!(t.one_time_guidance["nl_proof"].calls, 5);
    assert_eq!(t.lemma_processing["selection"].calls, 2);
    assert_eq!(t.lemma_processing["assembly"].calls, 1);
    let calls: u64 = t.prover_attempts.values().map(|a| a.calls).sum();
    assert_eq!(calls, 1 + 2 + 5 + 8 + 8);
    // simulated time: every generation and every check spans one tick
    assert_eq!(t.prover_attempts["initial"].mean_generation_seconds, 0.25);
    assert_eq!(t.one_time_guidance["summary"].mean_seconds, 0.25);
}

#[test]
fn logs_have_the_exact_schema() {
    let (_tmp, b, config) = setup("");
    run(&b, &config, "out", false);
    let out = b.dir.join("out");
    for line in read(&out, ATTEMPTS_LOG).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            ["attempt_index", "completion", "contains_sorry", "gen_seconds", "prompt_sha256", "stage", "status", "theorem", "verify_seconds"]
        );
    }
    for line in read(&out, GUIDANCE_LOG).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["response_sha256", "seconds", "task", "theorem"]);
    }
    let raw = read(&out, GUIDANCE_RAW_LOG);
    assert!(raw.contains(support::scenarios::SUMMARY.split('.').next().unwrap()));
    assert_eq!(raw.lines().count(), read(&out, GUIDANCE_LOG).lines().count());
}

#[test]
fn pass_curve_is_computable_from_the_logs_alone() {
    let (_tmp, b, config) = setup("");
    let first = run(&b, &config, "out", false).report;
    let again = report_from_dir(&b.dir.join("out"), &[32, 128]).unwrap();
    assert_eq!(first, again);
    let ks = report_from_dir(&b.dir.join("out"), &[1, 2, 5]).unwrap().pass_at_k;
    assert_eq!(ks.values().copied().collect::<Vec<_>>(), [0.2, 0.4, 0.6]);
}

#[test]
fn attempt_counts_equal_ledgers() {
    let (_tmp, b, config) = setup("");
    run(&b, &config, "out", false);
    let out = b.dir.join("out");
    let attempts: Vec<AttemptLogLine> =
        read(&out, ATTEMPTS_LOG).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    for line in read(&out, OUTCOMES_LOG).lines() {
        let o: TheoremOutcome = serde_json::from_str(line).unwrap();
        let mine: Vec<_> = attempts.iter().filter(|a| a.theorem == o.task).collect();
        assert_eq!(mine.len() as u32, o.ledger.consumed);
        let replayed = guided_prover::task::BudgetLedger::replay(o.ledger.total, mine, []).unwrap();
        assert_eq!(replayed.per_stage, o.ledger.per_stage);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let (_tmp, b, config) = setup("");
    run(&b, &config, "one", false);
    run(&b, &config, "two", false);
    for f in [ATTEMPTS_LOG, GUIDANCE_LOG, GUIDANCE_RAW_LOG, OUTCOMES_LOG, REPORT_JSON] {
        assert_eq!(read(&b.dir.join("one"), f), read(&b.dir.join("two"), f), "{f}");
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let (_tmp, b, config) = setup("");
    let mut four = config.clone();
    four.workers = 4;
    let r1 = run(&b, &config, "w1", false).report;
    let r4 = run(&b, &four, "w4", false).report;
    assert_eq!(r1.pass_curve, r4.pass_curve);
    assert_eq!(r1.outcomes, r4.outcomes);
    assert_eq!(r1.timings, r4.timings);
    for f in [ATTEMPTS_LOG, GUIDANCE_LOG, OUTCOMES_LOG] {
        assert_eq!(read(&b.dir.join("w1"), f), read(&b.dir.join("w4"), f), "{f}");
    }
}

fn scripted_clients(b: &bench::Bench) -> (Clients, Arc<ScriptedClient>, Arc<ScriptedClient>) {
    let reasoner = Arc::new(ScriptedClient::from_file(Role::Reasoner, b.dir.join("reasoner.jsonl")).unwrap());
    let worker = Arc::new(ScriptedClient::from_file(Role::Worker, b.dir.join("worker.jsonl")).unwrap());
    let prover = Arc::new(ScriptedClient::from_file(Role::Prover, b.dir.join("prover.jsonl")).unwrap());
    let clients = Clients { reasoner: reasoner.clone(), worker, prover: prover.clone() };
    (clients, reasoner, prover)
}

#[test]
fn resume_of_a_finished_run_makes_no_calls() {
    let (_tmp, b, config) = setup("");
    let first = run(&b, &config, "out", false);
    let before = read(&b.dir.join("out"), ATTEMPTS_LOG);
    let (clients, reasoner, prover) = scripted_clients(&b);
    let mut opts = RunOptions::new(b.dir.join("out"));
    opts.resume = true;
    let pool = VerifierConfig::mock().build_pool(1);
    let entries = load_dataset(&b.dataset).unwrap();
    let second = run_benchmark_with(&config, &entries, &opts, &clients, &pool).unwrap();
    assert_eq!(second.executed, 0);
    assert_eq!(prover.calls(), 0);
    assert_eq!(reasoner.calls(), 0);
    assert_eq!(first.report, second.report);
    assert_eq!(before, read(&b.dir.join("out"), ATTEMPTS_LOG));
}

#[test]
fn resume_after_a_crash_reruns_only_unfinished_theorems() {
    let (_tmp, b, config) = setup("");
    run(&b, &config, "full", false);
    run(&b, &config, "crashed", false);
    let crashed = b.dir.join("crashed");
    // lose the last two outcomes and leave a torn line plus stray attempts
    let outcomes: Vec<_> = read(&crashed, OUTCOMES_LOG).lines().map(String::from).collect();
    fs::write(crashed.join(OUTCOMES_LOG), format!("{}\n{}\n{{\"task\": \"del", outcomes[0], outcomes[1..3].join("\n")))
        .unwrap();
    let result = run(&b, &config, "crashed", true);
    assert_eq!(result.executed, 2);
    for f in [ATTEMPTS_LOG, GUIDANCE_LOG, GUIDANCE_RAW_LOG, OUTCOMES_LOG, REPORT_JSON] {
        assert_eq!(read(&b.dir.join("full"), f), read(&crashed, f), "{f}");
    }
}

#[test]
fn changed_config_invalidates_resume() {
    let (_tmp, b, config) = setup("");
    run(&b, &config, "out", false);
    let mut changed = config.clone();
    changed.pipeline.budget = 16;
    let entries = load_dataset(&b.dataset).unwrap();
    let mut opts = RunOptions::new(b.dir.join("out"));
    opts.resume = true;
    let err = run_benchmark(&changed, &entries, &opts).unwrap_err();
    assert!(matches!(err, HarnessError::ResumeMismatch { .. }));
    assert_eq!(err.exit_code(), 1);
    // more workers is not a config change
    changed = config.clone();
    changed.workers = 3;
    assert_eq!(run_benchmark(&changed, &entries, &opts).unwrap().executed, 0);
}

#[test]
fn infrastructure_failures_are_isolated() {
    let (_tmp, b, config) = setup("");
    // the prover script for delta starts with an outage
    let script = read(&b.dir, "prover.jsonl");
    let first = script.lines().find(|l| l.contains("\"delta\"")).unwrap();
    let broken = script.replacen(first, r#"{"theorem":"delta","error":"unavailable"}"#, 1);
    fs::write(b.dir.join("prover.jsonl"), broken).unwrap();
    let result = run(&b, &config, "out", false);
    assert!(result.any_infrastructure_failure());
    assert_eq!(result.report.infrastructure_failures, 1);
    assert_eq!(result.report.solved, 3);
    let delta = &result.report.outcomes[3];
    assert_eq!(delta.consumed, 0);
    assert!(delta.infrastructure_failure.is_some());
    // a resume retries the aborted theorem
    assert_eq!(run(&b, &config, "out", true).executed, 1);
}

#[test]
fn bad_config_fails_before_any_work() {
    let (_tmp, b, mut config) = setup("");
    config.pipeline.initial_attempts = 100;
    let entries = load_dataset(&b.dataset).unwrap();
    let err = run_benchmark(&config, &entries, &RunOptions::new(b.dir.join("out"))).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(!b.dir.join("out").exists());
}
