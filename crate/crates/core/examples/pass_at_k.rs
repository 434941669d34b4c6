// Pass@k and the pass curve from solving indices.

use guided_prover::harness::{compute_pass_at_k, pass_curve};
use guided_prover::task::{BudgetLedger, TheoremOutcome};

fn outcome(name: &str, solved_at: Option<u32>) -> TheoremOutcome {
    TheoremOutcome {
        task: name.into(),
        solved: solved_at.is_some(),
        solving_attempt_index: solved_at,
        final_proof: None,
        final_status: None,
        phase_trace: Vec::new(),
        ledger: BudgetLedger::new(128),
        infrastructure_failure: None,
        diagnostics: Vec::new(),
        checks: Default::default(),
    }
}

fn main() {
    let outcomes = [outcome("a", Some(10)), outcome("b", Some(50)), outcome("c", None)];
    for k in [1, 10, 32, 50, 128] {
        println!("pass@{k:<3} = {:.4}", compute_pass_at_k(&outcomes, k));
    }
    let curve = pass_curve(&outcomes, 128);
    let steps: Vec<_> = curve.windows(2).enumerate().filter(|(_, w)| w[0] != w[1]).map(|(j, _)| j + 2).collect();
    println!("curve rises at k = {steps:?}");
    assert_eq!(compute_pass_at_k(&outcomes, 32), 1.0 / 3.0);
    assert_eq!(compute_pass_at_k(&outcomes, 128), 2.0 / 3.0);
}
