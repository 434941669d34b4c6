use crate::guidance::GuidanceCall;
use crate::task::ProofAttempt;

/// Receives records as a pipeline produces them.
pub trait RunSink {
    fn attempt(&mut self, _theorem: &str, _attempt: &ProofAttempt) {}
    fn guidance(&mut self, _theorem: &str, _call: &GuidanceCall) {}
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl RunSink for NullSink {}

/// Keeps full records, prompts included.
#[derive(Debug, Default, Clone)]
pub struct MemorySink {
    pub attempts: Vec<(String, ProofAttempt)>,
    pub guidance: Vec<(String, GuidanceCall)>,
}

impl RunSink for MemorySink {
    fn attempt(&mut self, theorem: &str, attempt: &ProofAttempt) {
        self.attempts.push((theorem.to_string(), attempt.clone()));
    }

    fn guidance(&mut self, theorem: &str, call: &GuidanceCall) {
        self.guidance.push((theorem.to_string(), call.clone()));
    }
}
