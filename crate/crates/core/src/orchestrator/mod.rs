//! The per-theorem phase machine: initial attempts, lemma selection,
//! salvage, main sketch, lemma loop and assembly, with fallback.

mod completion;
mod config;
mod phase;
mod pipeline;
mod sink;

pub use completion::extract_proof_body;
pub use config::{ConfigError, PipelineConfig};
pub use phase::{is_legal_trace, PipelinePhase};
pub use pipeline::{run_pipeline, Abort, AttemptRun, Endpoints, Pipeline};
pub use sink::{MemorySink, NullSink, RunSink};
