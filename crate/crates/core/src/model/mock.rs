//! Deterministic model stand-ins.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Completion, CompletionRequest, ModelClient, ModelError, Role};

/// One scripted response. Entries with a `theorem` are served only to calls
/// made for that theorem; the rest form a shared queue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<String>,
    #[serde(default)]
    pub content: String,
    /// `unavailable` or `malformed` to inject a transport failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScriptEntry {
    pub fn text(content: impl Into<String>) -> Self {
        Self { theorem: None, content: content.into(), error: None }
    }

    pub fn for_theorem(theorem: impl Into<String>, content: impl Into<String>) -> Self {
        Self { theorem: Some(theorem.into()), content: content.into(), error: None }
    }

    pub fn failure(kind: &str) -> Self {
        Self { theorem: None, content: String::new(), error: Some(kind.to_string()) }
    }
}

#[derive(Debug, Default)]
struct Queues {
    shared: VecDeque<ScriptEntry>,
    by_theorem: HashMap<String, VecDeque<ScriptEntry>>,
}

/// Replays a script: the n-th call for a theorem gets that theorem's n-th entry.
#[derive(Debug)]
pub struct ScriptedClient {
    role: Role,
    queues: Mutex<Queues>,
    calls: AtomicU64,
}

impl ScriptedClient {
    pub fn new(role: Role, entries: impl IntoIterator<Item = ScriptEntry>) -> Self {
        let mut q = Queues::default();
        for e in entries {
            match &e.theorem {
                Some(t) => q.by_theorem.entry(t.clone()).or_default().push_back(e),
                None => q.shared.push_back(e),
            }
        }
        Self { role, queues: Mutex::new(q), calls: AtomicU64::new(0) }
    }

    /// Plain responses served in order regardless of theorem.
    pub fn from_texts<S: Into<String>>(role: Role, texts: impl IntoIterator<Item = S>) -> Self {
        Self::new(role, texts.into_iter().map(ScriptEntry::text))
    }

    pub fn from_file(role: Role, path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Config(format!("mock script {}: {e}", path.display())))?;
        let mut entries = Vec::new();
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ScriptEntry = serde_json::from_str(line)
                .map_err(|e| ModelError::Config(format!("mock script {}:{}: {e}", path.display(), no + 1)))?;
            entries.push(entry);
        }
        Ok(Self::new(role, entries))
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// Entries not yet served.
    pub fn remaining(&self) -> usize {
        let q = self.queues.lock().unwrap_or_else(|e| e.into_inner());
        q.shared.len() + q.by_theorem.values().map(VecDeque::len).sum::<usize>()
    }
}

impl ModelClient for ScriptedClient {
    fn role(&self) -> Role {
        self.role
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let entry = {
            let mut q = self.queues.lock().unwrap_or_else(|e| e.into_inner());
            let own = q.by_theorem.get_mut(&request.context).and_then(VecDeque::pop_front);
            own.or_else(|| q.shared.pop_front())
        };
        let entry = entry.ok_or_else(|| ModelError::ScriptExhausted { role: self.role, context: request.context.clone() })?;
        match entry.error.as_deref() {
            None => Ok(Completion::text(entry.content)),
            Some("malformed") => Err(ModelError::Malformed { role: self.role, reason: "scripted".into() }),
            Some(other) => Err(ModelError::Unavailable { role: self.role, attempts: 1, reason: format!("scripted {other}") }),
        }
    }
}

type Responder = dyn Fn(&CompletionRequest, u64) -> Result<String, ModelError> + Send + Sync;

/// Answers with a closure of the request and the 0-based global call number.
pub struct FnClient {
    role: Role,
    f: Box<Responder>,
    calls: AtomicU64,
}

impl FnClient {
    pub fn new(role: Role, f: impl Fn(&CompletionRequest, u64) -> Result<String, ModelError> + Send + Sync + 'static) -> Self {
        Self { role, f: Box::new(f), calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ModelClient for FnClient {
    fn role(&self) -> Role {
        self.role
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        (self.f)(request, n).map(Completion::text)
    }
}

/// Prover whose every call succeeds independently with probability `p`.
///
/// Outcomes depend only on the seed, the theorem and how many calls that
/// theorem has made, so they do not change with scheduling.
pub struct BernoulliProver {
    p: f64,
    seed: u64,
    per_theorem: Mutex<HashMap<String, u64>>,
    calls: AtomicU64,
}

impl BernoulliProver {
    /// Completion that the mock verifier accepts.
    pub const SUCCESS: &'static str = "  trivial\n```";
    /// Completion that the mock verifier rejects.
    pub const FAILURE: &'static str = "  fail\n```";

    pub fn new(p: f64, seed: u64) -> Self {
        Self { p: p.clamp(0.0, 1.0), seed, per_theorem: Mutex::new(HashMap::new()), calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    fn draw(&self, theorem: &str, n: u64) -> bool {
        let digest = Sha256::digest(format!("{}\u{0}{theorem}\u{0}{n}", self.seed).as_bytes());
        let mut word = [0u8; 8];
        word.copy_from_slice(&digest[..8]);
        ChaCha8Rng::seed_from_u64(u64::from_le_bytes(word)).random_bool(self.p)
    }
}

impl ModelClient for BernoulliProver {
    fn role(&self) -> Role {
        Role::Prover
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let n = {
            let mut m = self.per_theorem.lock().unwrap_or_else(|e| e.into_inner());
            let c = m.entry(request.context.clone()).or_default();
            *c += 1;
            *c
        };
        Ok(Completion::text(if self.draw(&request.context, n) { Self::SUCCESS } else { Self::FAILURE }))
    }
}
