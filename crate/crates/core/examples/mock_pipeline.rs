// One theorem through the whole pipeline against scripted endpoints and the
// lexical mock verifier: initial attempts fail, a lemma is salvaged from
// them, the main sketch and remaining lemma prove, and the pieces assemble.

use std::time::Duration;

use guided_prover::clock::TickClock;
use guided_prover::model::{Role, ScriptedClient, TemplateSet};
use guided_prover::orchestrator::{run_pipeline, Endpoints, MemorySink, PipelineConfig};
use guided_prover::task::TheoremTask;
use guided_prover::verifier::MockVerifier;

const FAILED: &str = "  have h1 : 3 * x = 9 := by linarith\n  have h2 : x = 9 / 3 := by\n    fail\n  fail\n```";

fn main() {
    let task = TheoremTask::new(
        "demo",
        "theorem demo (x : ℝ) (h : 3 * x + 2 = 11) : x = 3",
        "If 3x + 2 = 11 then x = 3.",
        "import Mathlib",
    )
    .unwrap();
    let config = PipelineConfig { initial_attempts: 4, budget: 16, ..PipelineConfig::default() };

    let reasoner = ScriptedClient::from_texts(Role::Reasoner, ["Subtract 2 from both sides, then divide by 3."]);
    let worker = ScriptedClient::from_texts(
        Role::Worker,
        [
            "We want to show that x = 3. Subtract 2, then divide by 3.".to_string(),
            "**CHOSEN LEMMAS:**\nhave l_0 : 3 * x = 9 := by\nhave l_1 : x = 9 / 3 := by\n".to_string(),
            "**STEPS:**\nl_0:\n**Proof:** Subtract 2.\nl_1:\n**Proof:** Divide by 3.\n**Final Proof:** Simplify.\n"
                .to_string(),
        ],
    );
    let mut prover_script = vec![FAILED; 4];
    // main sketch, then lemma l_1
    prover_script.extend(["  linarith [l_1]\n```", "  linarith\n```"]);
    let prover = ScriptedClient::from_texts(Role::Prover, prover_script);

    let mut verifier = MockVerifier::new();
    let clock = TickClock::new(Duration::from_millis(100));
    let mut sink = MemorySink::default();
    let endpoints = Endpoints { reasoner: &reasoner, worker: &worker, prover: &prover };
    let outcome = run_pipeline(&task, &config, endpoints, &TemplateSet::default(), &mut verifier, &clock, &mut sink);

    for (_, a) in &sink.attempts {
        println!("#{:<2} {:<12} {:?}", a.attempt_index, a.stage.to_string(), a.verification.status);
    }
    println!("trace: {:?}", outcome.phase_trace);
    println!("consumed {} of {}; per stage {:?}", outcome.ledger.consumed, outcome.ledger.total, outcome.ledger.per_stage);
    println!("\n{}", outcome.final_proof.as_deref().unwrap_or("(unsolved)"));
    assert!(outcome.solved);
    assert_eq!(outcome.ledger.consumed, 6);
}
