// A 50-theorem benchmark with a seeded coin-flip prover, four workers and
// the mock verifier. Writes logs and a report under the system temp dir.

use guided_prover::harness::{parse_dataset, run_benchmark, RunConfig, RunOptions};
use guided_prover::orchestrator::PipelineConfig;

fn main() {
    let dataset: String = (0..50)
        .map(|i| format!("{{\"name\": \"coin_{i}\", \"formal_statement\": \"theorem coin_{i} : True\", \"informal_statement\": \"\"}}\n"))
        .collect();
    let entries = parse_dataset(&dataset).unwrap();

    let out = std::env::temp_dir().join(format!("guided-prover-example-{}", std::process::id()));
    std::fs::create_dir_all(&out).unwrap();
    // guidance is switched off, so the guidance scripts stay empty
    let empty = out.join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let script = format!("mock:{}", empty.display());
    let mut config = RunConfig::mock(&script, &script, "bernoulli:0.2:7");
    config.pipeline = PipelineConfig {
        budget: 16,
        initial_attempts: 16,
        informal_guidance: false,
        lemma_guidance: false,
        ..PipelineConfig::default()
    };
    config.workers = 4;

    let mut opts = RunOptions::new(&out);
    opts.ks = vec![1, 4, 16];
    let result = run_benchmark(&config, &entries, &opts).unwrap();
    print!("{}", result.report.to_table());
    println!("\nlogs in {}", out.display());
    // 1 - 0.8^16 ≈ 0.97
    assert!(result.report.pass_at_k[&16] > 0.85);
    std::fs::remove_dir_all(&out).ok();
}
