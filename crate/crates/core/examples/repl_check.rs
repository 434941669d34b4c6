// Check proofs against a live Lean REPL. Needs `lake` on PATH and
// LEAN_REPL_PROJECT naming a Lake project that builds the REPL and Mathlib;
// otherwise it explains what is missing and exits.

use std::time::Duration;

use guided_prover::lean::LeanSource;
use guided_prover::verifier::{check_proof, ReplConfig, ReplSession};

fn main() {
    let Some(project) = std::env::var_os("LEAN_REPL_PROJECT") else {
        println!("set LEAN_REPL_PROJECT to a Lake project with the REPL to run this example");
        return;
    };
    let mut config = ReplConfig::new(["lake", "exe", "repl"]);
    config.cwd = Some(project.into());
    let mut session = ReplSession::new(config);
    let timeout = Duration::from_secs(20);
    for (header, proof) in [
        ("theorem ok (x : ℝ) (h : 2 * x = 6) : x = 3", "linarith"),
        ("theorem wrong : (2 : ℕ) + 2 = 5", "norm_num"),
        ("theorem lazy : 1 = 1", "sorry"),
    ] {
        let r = check_proof(&mut session, &LeanSource::theorem("import Mathlib", header, proof), timeout);
        println!("{:<45} {:?} in {:.2}s", header, r.status, r.elapsed);
        for m in &r.messages {
            println!("    {:?}: {}", m.severity, m.text.lines().next().unwrap_or(""));
        }
    }
}
