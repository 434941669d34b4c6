//! Model endpoints: the guidance tiers (reasoner, worker) and the prover,
//! all spoken to through the chat-completions shape.

mod http;
mod mock;
mod template;

use std::sync::{Condvar, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::HttpClient;
pub use mock::{BernoulliProver, FnClient, ScriptEntry, ScriptedClient};
pub use template::{enumerate_lemmas, render, PromptTemplate, TemplateError, TemplateId, TemplateSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("endpoint {role} unavailable after {attempts} attempt(s): {reason}")]
    Unavailable { role: Role, attempts: u32, reason: String },
    #[error("malformed response from {role}: {reason}")]
    Malformed { role: Role, reason: String },
    #[error("mock script for {role} exhausted (context `{context}`)")]
    ScriptExhausted { role: Role, context: String },
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Writes the full natural-language proof.
    Reasoner,
    /// Summaries, lemma selection and informal lemma proofs.
    Worker,
    Prover,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Reasoner, Role::Worker, Role::Prover];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Reasoner => "reasoner",
            Role::Worker => "worker",
            Role::Prover => "prover",
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionRequest {
    pub messages: Vec<ChatMessage>,
    /// Theorem the call is made for. Mocks key their scripts on it.
    pub context: String,
}

impl CompletionRequest {
    pub fn new(context: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        Self { messages, context: context.into() }
    }

    /// Concatenated message contents, used for hashing and logging.
    pub fn prompt_text(&self) -> String {
        self.messages.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n\n")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub usage: Option<Usage>,
    /// Wall-clock seconds including retries.
    pub latency: f64,
}

impl Completion {
    pub fn text(text: impl Into<String>) -> Self {
        Self { text: text.into(), usage: None, latency: 0.0 }
    }
}

pub trait ModelClient: Send + Sync {
    fn role(&self) -> Role;
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    #[serde(skip)]
    pub role: Option<Role>,
    pub base_url: String,
    #[serde(default)]
    pub model: String,
    pub temperature: Option<f64>,
    pub top_p: Option<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Environment variable holding a bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_concurrency")]
    pub max_concurrent: usize,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

fn default_max_tokens() -> u32 {
    4096
}
fn default_timeout() -> f64 {
    300.0
}
fn default_retries() -> u32 {
    4
}
fn default_concurrency() -> usize {
    8
}
fn default_backoff() -> u64 {
    500
}

impl EndpointConfig {
    pub fn new(role: Role, base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            role: Some(role),
            base_url: base_url.into(),
            model: model.into(),
            temperature: None,
            top_p: None,
            max_tokens: default_max_tokens(),
            timeout_s: default_timeout(),
            max_retries: default_retries(),
            api_key_env: None,
            max_concurrent: default_concurrency(),
            backoff_ms: default_backoff(),
        }
    }

    pub fn role(&self) -> Role {
        self.role.unwrap_or(Role::Worker)
    }

    pub fn temperature(&self) -> f64 {
        self.temperature.unwrap_or(if self.role() == Role::Prover { 1.0 } else { 0.7 })
    }

    pub fn top_p(&self) -> Option<f64> {
        self.top_p.or((self.role() == Role::Prover).then_some(0.95))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.temperature().is_nan() || self.temperature() < 0.0 {
            return Err(ModelError::Config(format!("{}: temperature must be >= 0", self.role())));
        }
        if let Some(p) = self.top_p() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ModelError::Config(format!("{}: top_p must lie in (0, 1]", self.role())));
            }
        }
        if self.base_url.trim().is_empty() {
            return Err(ModelError::Config(format!("{}: base_url is empty", self.role())));
        }
        if self.max_concurrent == 0 {
            return Err(ModelError::Config(format!("{}: max_concurrent must be >= 1", self.role())));
        }
        Ok(())
    }
}

/// Builds the client for an endpoint. `mock:<path>` loads a JSONL script and
/// `bernoulli:<p>:<seed>` gives a random prover.
pub fn build_client(config: &EndpointConfig) -> Result<Box<dyn ModelClient>, ModelError> {
    config.validate()?;
    let role = config.role();
    if let Some(path) = config.base_url.strip_prefix("mock:") {
        return Ok(Box::new(ScriptedClient::from_file(role, path)?));
    }
    if let Some(spec) = config.base_url.strip_prefix("bernoulli:") {
        let (p, seed) = spec
            .split_once(':')
            .and_then(|(p, s)| Some((p.parse::<f64>().ok()?, s.parse::<u64>().ok()?)))
            .ok_or_else(|| ModelError::Config(format!("expected bernoulli:<p>:<seed>, got `{}`", config.base_url)))?;
        return Ok(Box::new(BernoulliProver::new(p, seed)));
    }
    Ok(Box::new(HttpClient::new(config.clone())?))
}

/// Counting semaphore capping concurrent requests to one endpoint.
#[derive(Debug)]
pub(crate) struct Admission {
    free: Mutex<usize>,
    cv: Condvar,
}

pub(crate) struct Permit<'a>(&'a Admission);

impl Admission {
    pub fn new(capacity: usize) -> Self {
        Self { free: Mutex::new(capacity.max(1)), cv: Condvar::new() }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}
