//! Dataset ingestion, run configuration, parallel execution and reporting.

mod config;
mod dataset;
mod report;
mod run;

pub use config::{ClockMode, Endpoints, RunConfig, DEFAULT_PREAMBLE};
pub use dataset::{load_dataset, parse_dataset, DatasetEntry, DatasetError};
pub use report::{
    compute_pass_at_k, pass_curve, AttemptTiming, ComponentTiming, ModelIds, OutcomeSummary, RunReport, TimingReport,
    REPORT_SCHEMA_VERSION,
};
pub use run::{
    report_from_dir, run_benchmark, run_benchmark_with, Clients, GuidanceRawLine, RunManifest, RunOptions, RunResult,
    ATTEMPTS_LOG, DEFAULT_KS, GUIDANCE_LOG, GUIDANCE_RAW_LOG, OUTCOMES_LOG, REPORT_JSON, REPORT_TABLE, RUN_FILE,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("dataset error: {0}")]
    Dataset(#[from] DatasetError),
    #[error("existing run was made with config {found}, this config hashes to {expected}; use a new --out or drop --resume")]
    ResumeMismatch { found: String, expected: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    /// Process exit code: 1 config, 2 infrastructure, 3 dataset.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::ResumeMismatch { .. } => 1,
            Self::Io(_) => 2,
            Self::Dataset(_) => 3,
        }
    }
}
