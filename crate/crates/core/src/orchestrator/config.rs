use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("initial_attempts ({initial}) exceeds budget ({budget})")]
    InitialExceedsBudget { initial: u32, budget: u32 },
    #[error("max_lemmas must be at least 1 when lemma guidance is on")]
    NoLemmas,
    #[error("verify_timeout_s must be positive")]
    Timeout,
    #[error("pool_cap must be at least 1")]
    PoolCap,
}

/// Per-theorem pipeline knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Prover calls per theorem.
    pub budget: u32,
    pub initial_attempts: u32,
    pub max_lemmas: usize,
    pub max_main_attempts: u32,
    pub verify_timeout_s: f64,
    pub pool_cap: usize,
    /// Embed guidance-model informal proofs in prover prompts.
    pub informal_guidance: bool,
    /// Run lemma extraction, selection and proving.
    pub lemma_guidance: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            budget: 128,
            initial_attempts: 16,
            max_lemmas: 5,
            max_main_attempts: 8,
            verify_timeout_s: 20.0,
            pool_cap: 64,
            informal_guidance: true,
            lemma_guidance: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.initial_attempts > self.budget {
            return Err(ConfigError::InitialExceedsBudget { initial: self.initial_attempts, budget: self.budget });
        }
        if self.lemma_guidance && self.max_lemmas == 0 {
            return Err(ConfigError::NoLemmas);
        }
        if self.verify_timeout_s.is_nan() || self.verify_timeout_s <= 0.0 {
            return Err(ConfigError::Timeout);
        }
        if self.pool_cap == 0 {
            return Err(ConfigError::PoolCap);
        }
        Ok(())
    }

    pub fn verify_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.verify_timeout_s)
    }

    /// Initial attempts actually run: the whole budget without lemma guidance.
    pub fn effective_initial_attempts(&self) -> u32 {
        if self.lemma_guidance {
            self.initial_attempts.min(self.budget)
        } else {
            self.budget
        }
    }
}
