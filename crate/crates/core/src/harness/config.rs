//! Run configuration: one TOML file with the pipeline knobs at the top level
//! and `[endpoints.<role>]` and `[verifier]` sections.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::clock::{Clock, SystemClock, TickClock};
use crate::model::{EndpointConfig, Role};
use crate::orchestrator::PipelineConfig;
use crate::task::sha256_hex;
use crate::verifier::VerifierConfig;

pub const DEFAULT_PREAMBLE: &str =
    "import Mathlib\nimport Aesop\n\nset_option maxHeartbeats 400000\n\nopen BigOperators Real Nat Topology Rat";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    #[default]
    System,
    /// Every clock reading advances by `tick_ms`; timings become reproducible.
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoints {
    pub reasoner: EndpointConfig,
    pub worker: EndpointConfig,
    pub prover: EndpointConfig,
}

impl Endpoints {
    pub fn get(&self, role: Role) -> &EndpointConfig {
        match role {
            Role::Reasoner => &self.reasoner,
            Role::Worker => &self.worker,
            Role::Prover => &self.prover,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_preamble")]
    pub preamble: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates_dir: Option<PathBuf>,
    #[serde(default)]
    pub clock: ClockMode,
    #[serde(default = "default_tick_ms")]
    pub tick_ms: u64,
    pub endpoints: Endpoints,
    #[serde(default)]
    pub verifier: VerifierConfig,
}

fn default_workers() -> usize {
    1
}

fn default_preamble() -> String {
    DEFAULT_PREAMBLE.to_string()
}

fn default_tick_ms() -> u64 {
    250
}

impl RunConfig {
    /// Defaults everywhere, with the given endpoints.
    pub fn new(endpoints: Endpoints) -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            workers: default_workers(),
            preamble: default_preamble(),
            templates_dir: None,
            clock: ClockMode::System,
            tick_ms: default_tick_ms(),
            endpoints,
            verifier: VerifierConfig::default(),
        }
    }

    /// Every endpoint scripted from the same base URL kind, with a mock verifier
    /// and simulated time.
    pub fn mock(reasoner: &str, worker: &str, prover: &str) -> Self {
        let mut config = Self::new(Endpoints {
            reasoner: EndpointConfig::new(Role::Reasoner, reasoner, "mock"),
            worker: EndpointConfig::new(Role::Worker, worker, "mock"),
            prover: EndpointConfig::new(Role::Prover, prover, "mock"),
        });
        config.verifier = VerifierConfig::mock();
        config.clock = ClockMode::Simulated;
        config.resolve_sampling();
        config
    }

    /// Replace unset sampling parameters with the role defaults so the
    /// snapshot in the report shows what was actually sent.
    fn resolve_sampling(&mut self) {
        for e in [&mut self.endpoints.reasoner, &mut self.endpoints.worker, &mut self.endpoints.prover] {
            e.temperature = Some(e.temperature());
            e.top_p = e.top_p();
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let mut config: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.endpoints.reasoner.role = Some(Role::Reasoner);
        config.endpoints.worker.role = Some(Role::Worker);
        config.endpoints.prover.role = Some(Role::Prover);
        config.resolve_sampling();
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        for role in [Role::Reasoner, Role::Worker, Role::Prover] {
            let endpoint = match role {
                Role::Reasoner => &mut config.endpoints.reasoner,
                Role::Worker => &mut config.endpoints.worker,
                Role::Prover => &mut config.endpoints.prover,
            };
            if let Some(script) = endpoint.base_url.strip_prefix("mock:") {
                if Path::new(script).is_relative() {
                    endpoint.base_url = format!("mock:{}", base.join(script).display());
                }
            }
        }
        if let Some(dir) = &config.templates_dir {
            if dir.is_relative() {
                config.templates_dir = Some(base.join(dir));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.pipeline.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.workers == 0 {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        if self.clock == ClockMode::Simulated && self.tick_ms == 0 {
            return Err(HarnessError::Config("tick_ms must be positive".into()));
        }
        for role in [Role::Reasoner, Role::Worker, Role::Prover] {
            self.endpoints.get(role).validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Verifier sessions in the pool.
    pub fn sessions(&self) -> usize {
        self.verifier.sessions.unwrap_or(self.workers).max(1)
    }

    /// A fresh clock for one theorem.
    pub fn clock(&self) -> Box<dyn Clock> {
        match self.clock {
            ClockMode::System => Box::new(SystemClock::new()),
            ClockMode::Simulated => Box::new(TickClock::new(Duration::from_millis(self.tick_ms))),
        }
    }

    /// Hash of everything that can change a theorem's outcome. Worker and
    /// session counts are left out.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = 0;
        canonical.verifier.sessions = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        sha256_hex(&json)
    }
}
