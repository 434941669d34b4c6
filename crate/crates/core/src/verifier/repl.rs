//! A Lean REPL child process spoken to over its JSON-lines protocol.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;

use super::{classify, ProofChecker};
use crate::lean::LeanSource;
use crate::task::{Message, Position, Severity, VerificationResult, VerificationStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct ReplConfig {
    /// Program and arguments, e.g. `["lake", "exe", "repl"]`.
    pub command: Vec<String>,
    pub cwd: Option<PathBuf>,
    /// Allowance for elaborating the preamble after a (re)spawn.
    pub startup_timeout: Duration,
}

impl ReplConfig {
    pub fn new<S: Into<String>>(command: impl IntoIterator<Item = S>) -> Self {
        Self {
            command: command.into_iter().map(Into::into).collect(),
            cwd: None,
            startup_timeout: Duration::from_secs(900),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionHealth {
    /// No process yet, or killed after a timeout or crash; respawned on demand.
    Down,
    Ready,
}

#[derive(Debug, Deserialize)]
struct ReplPos {
    line: u32,
    column: u32,
}

#[derive(Debug, Deserialize)]
struct ReplMessage {
    severity: String,
    #[serde(default)]
    pos: Option<ReplPos>,
    #[serde(default)]
    data: String,
}

#[derive(Debug, Deserialize)]
struct ReplResponse {
    #[serde(default)]
    env: Option<i64>,
    #[serde(default)]
    messages: Vec<ReplMessage>,
    #[serde(default)]
    sorries: Vec<serde_json::Value>,
    /// Set by the REPL when it rejects the request itself.
    #[serde(default)]
    message: Option<String>,
}

enum RunError {
    Timeout,
    Transport(String),
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    rx: Receiver<Result<String, String>>,
}

impl Process {
    fn spawn(config: &ReplConfig) -> Result<Self, String> {
        let (program, args) = config.command.split_first().ok_or("empty REPL command")?;
        let mut cmd = Command::new(program);
        cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::null());
        if let Some(dir) = &config.cwd {
            cmd.current_dir(dir);
        }
        let mut child = cmd.spawn().map_err(|e| format!("cannot start `{program}`: {e}"))?;
        let stdin = child.stdin.take().ok_or("REPL stdin unavailable")?;
        let stdout = child.stdout.take().ok_or("REPL stdout unavailable")?;
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            let mut block = String::new();
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => {
                        let _ = tx.send(Err("REPL closed its output".to_string()));
                        return;
                    }
                    Ok(_) if line.trim().is_empty() => {
                        if !block.is_empty() && tx.send(Ok(std::mem::take(&mut block))).is_err() {
                            return;
                        }
                    }
                    Ok(_) => block.push_str(&line),
                    Err(e) => {
                        let _ = tx.send(Err(e.to_string()));
                        return;
                    }
                }
            }
        });
        Ok(Self { child, stdin, rx })
    }

    fn request(&mut self, payload: &serde_json::Value, timeout: Duration) -> Result<String, RunError> {
        let mut line = payload.to_string();
        line.push_str("\n\n");
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| RunError::Transport(format!("write to REPL failed: {e}")))?;
        match self.rx.recv_timeout(timeout) {
            Ok(Ok(block)) => Ok(block),
            Ok(Err(e)) => Err(RunError::Transport(e)),
            Err(RecvTimeoutError::Timeout) => Err(RunError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(RunError::Transport("REPL reader stopped".into())),
        }
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// One REPL process bound to one preamble. All commands go through
/// `&mut self`, so a session can never interleave two requests.
pub struct ReplSession {
    config: ReplConfig,
    process: Option<Process>,
    preamble: Option<String>,
    base_env: Option<i64>,
    transcript: Option<Vec<(String, String)>>,
    spawns: u32,
}

impl ReplSession {
    pub fn new(config: ReplConfig) -> Self {
        Self { config, process: None, preamble: None, base_env: None, transcript: None, spawns: 0 }
    }

    /// Keep every request and raw response.
    pub fn with_transcript(mut self) -> Self {
        self.transcript = Some(Vec::new());
        self
    }

    pub fn transcript(&self) -> &[(String, String)] {
        self.transcript.as_deref().unwrap_or_default()
    }

    pub fn health(&self) -> SessionHealth {
        if self.process.is_some() {
            SessionHealth::Ready
        } else {
            SessionHealth::Down
        }
    }

    /// Number of processes started so far.
    pub fn spawns(&self) -> u32 {
        self.spawns
    }

    fn kill(&mut self) {
        if let Some(p) = self.process.take() {
            p.kill();
        }
        self.base_env = None;
    }

    fn send(&mut self, payload: serde_json::Value, timeout: Duration) -> Result<ReplResponse, RunError> {
        let process = self.process.as_mut().ok_or_else(|| RunError::Transport("no REPL process".into()))?;
        let raw = process.request(&payload, timeout)?;
        if let Some(t) = &mut self.transcript {
            t.push((payload["cmd"].as_str().unwrap_or_default().to_string(), raw.clone()));
        }
        let resp: ReplResponse =
            serde_json::from_str(&raw).map_err(|e| RunError::Transport(format!("malformed REPL response: {e}")))?;
        match &resp.message {
            Some(m) if resp.env.is_none() && resp.messages.is_empty() => Err(RunError::Transport(format!("REPL: {m}"))),
            _ => Ok(resp),
        }
    }

    /// Spawn if needed and make the preamble's environment current.
    fn prepare(&mut self, preamble: &str) -> Result<(), String> {
        if self.preamble.as_deref() != Some(preamble) {
            self.base_env = None;
        }
        if self.process.is_none() {
            self.process = Some(Process::spawn(&self.config)?);
            self.spawns += 1;
            self.base_env = None;
        }
        if self.base_env.is_none() && !preamble.trim().is_empty() {
            let startup = self.config.startup_timeout;
            let resp = match self.send(json!({ "cmd": preamble }), startup) {
                Ok(r) => r,
                Err(RunError::Timeout) => return Err("preamble elaboration timed out".into()),
                Err(RunError::Transport(e)) => return Err(e),
            };
            if let Some(m) = resp.messages.iter().find(|m| m.severity == "error") {
                return Err(format!("preamble failed to elaborate: {}", m.data));
            }
            self.base_env = Some(resp.env.ok_or("REPL returned no environment for the preamble")?);
        }
        self.preamble = Some(preamble.to_string());
        Ok(())
    }

    fn run(&mut self, source: &LeanSource, timeout: Duration) -> Result<ReplResponse, RunError> {
        self.prepare(&source.preamble).map_err(RunError::Transport)?;
        let payload = match self.base_env {
            Some(env) => json!({ "cmd": source.body, "env": env }),
            None => json!({ "cmd": source.body }),
        };
        self.send(payload, timeout)
    }
}

impl Drop for ReplSession {
    fn drop(&mut self) {
        self.kill();
    }
}

fn severity(s: &str) -> Severity {
    match s {
        "error" => Severity::Error,
        "warning" => Severity::Warning,
        _ => Severity::Info,
    }
}

impl ProofChecker for ReplSession {
    fn check(&mut self, source: &LeanSource, timeout: Duration) -> VerificationResult {
        let mut last = String::new();
        for _ in 0..2 {
            let start = Instant::now();
            match self.run(source, timeout) {
                Ok(resp) => {
                    let messages = resp
                        .messages
                        .into_iter()
                        .map(|m| Message {
                            severity: severity(&m.severity),
                            pos: m.pos.map(|p| Position { line: p.line, column: p.column }),
                            text: m.data,
                        })
                        .collect();
                    return classify(&source.body, messages, resp.sorries.len(), start.elapsed().as_secs_f64());
                }
                Err(RunError::Timeout) => {
                    self.kill();
                    return VerificationResult {
                        status: VerificationStatus::Timeout,
                        messages: vec![],
                        contains_sorry: false,
                        elapsed: start.elapsed().as_secs_f64(),
                    };
                }
                Err(RunError::Transport(e)) => {
                    tracing::warn!(error = %e, "REPL transport failure, respawning");
                    self.kill();
                    last = e;
                }
            }
        }
        VerificationResult::transport_error(last, 0.0)
    }
}
