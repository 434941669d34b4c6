use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use guided_prover::harness::{self, HarnessError, RunConfig, RunOptions};
use guided_prover::lean::extract_have_statements;
use serde_json::json;

#[derive(Parser)]
#[command(name = "prove", version, about = "Guided lemma decomposition for a Lean 4 prover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline over a dataset.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        budget: Option<u32>,
        #[arg(long)]
        initial_attempts: Option<u32>,
        #[arg(long)]
        max_lemmas: Option<usize>,
        /// Seconds per Lean check.
        #[arg(long)]
        verify_timeout: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Skip theorems already finished in --out.
        #[arg(long)]
        resume: bool,
        #[arg(long, default_value = "runs/latest")]
        out: PathBuf,
    },
    /// Rebuild the report of a finished run from its logs.
    Report {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = harness::DEFAULT_KS)]
        k: Vec<u32>,
        /// Print JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Print the `have` statements of a Lean file as JSON lines.
    Extract {
        #[arg(long)]
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<u8, HarnessError> {
    match command {
        Command::Run { dataset, config, budget, initial_attempts, max_lemmas, verify_timeout, workers, resume, out } => {
            let mut config = RunConfig::load(&config)?;
            let p = &mut config.pipeline;
            p.budget = budget.unwrap_or(p.budget);
            p.initial_attempts = initial_attempts.unwrap_or(p.initial_attempts);
            p.max_lemmas = max_lemmas.unwrap_or(p.max_lemmas);
            p.verify_timeout_s = verify_timeout.unwrap_or(p.verify_timeout_s);
            config.workers = workers.unwrap_or(config.workers);
            config.validate()?;
            let entries = harness::load_dataset(&dataset)?;
            let opts = RunOptions { out, resume, ks: harness::DEFAULT_KS.to_vec() };
            let result = harness::run_benchmark(&config, &entries, &opts)?;
            print!("{}", result.report.to_table());
            Ok(if result.any_infrastructure_failure() { 2 } else { 0 })
        }
        Command::Report { log, k, json } => {
            if k.contains(&0) {
                return Err(HarnessError::Config("k must be at least 1".into()));
            }
            let report = harness::report_from_dir(&log, &k)?;
            if json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.to_table());
            }
            Ok(0)
        }
        Command::Extract { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| HarnessError::Io(format!("{}: {e}", file.display())))?;
            for l in extract_have_statements(&text) {
                let line = json!({
                    "binder": l.binder_name,
                    "statement": l.statement_text,
                    "normalized": l.normalized_statement(),
                    "pattern_binder": l.pattern_binder,
                    "proof": l.proof_text().map(|p| &p.text),
                });
                println!("{line}");
            }
            Ok(0)
        }
    }
}
