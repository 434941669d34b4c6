//! Parallel benchmark execution with streamed, resumable JSONL logs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{DatasetEntry, HarnessError, RunConfig, RunReport};
use crate::guidance::GuidanceCall;
use crate::model::{build_client, ModelClient, Role, TemplateSet};
use crate::orchestrator::{run_pipeline, Endpoints, RunSink};
use crate::task::{sha256_hex, AttemptLogLine, GuidanceLogLine, GuidanceTask, ProofAttempt, TheoremOutcome};
use crate::verifier::SessionPool;

pub const ATTEMPTS_LOG: &str = "attempts.jsonl";
pub const GUIDANCE_LOG: &str = "guidance.jsonl";
pub const GUIDANCE_RAW_LOG: &str = "guidance_raw.jsonl";
pub const OUTCOMES_LOG: &str = "outcomes.jsonl";
pub const RUN_FILE: &str = "run.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TABLE: &str = "report.txt";

pub const DEFAULT_KS: [u32; 2] = [32, 128];

/// The model clients shared by every pipeline of a run.
#[derive(Clone)]
pub struct Clients {
    pub reasoner: Arc<dyn ModelClient>,
    pub worker: Arc<dyn ModelClient>,
    pub prover: Arc<dyn ModelClient>,
}

impl Clients {
    pub fn from_config(config: &RunConfig) -> Result<Self, HarnessError> {
        let build = |role: Role| -> Result<Arc<dyn ModelClient>, HarnessError> {
            build_client(config.endpoints.get(role)).map(Arc::from).map_err(|e| HarnessError::Config(e.to_string()))
        };
        Ok(Self { reasoner: build(Role::Reasoner)?, worker: build(Role::Worker)?, prover: build(Role::Prover)? })
    }

    fn endpoints(&self) -> Endpoints<'_> {
        Endpoints { reasoner: &*self.reasoner, worker: &*self.worker, prover: &*self.prover }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub resume: bool,
    pub ks: Vec<u32>,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self { out: out.into(), resume: false, ks: DEFAULT_KS.to_vec() }
    }
}

/// Contents of `run.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub config: RunConfig,
}

/// Guidance response text, kept apart from the hashed log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceRawLine {
    pub theorem: String,
    pub task: GuidanceTask,
    pub seconds: f64,
    pub response: String,
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub report: RunReport,
    /// Theorems executed by this invocation, as opposed to resumed.
    pub executed: usize,
}

impl RunResult {
    pub fn any_infrastructure_failure(&self) -> bool {
        self.report.infrastructure_failures > 0
    }
}

struct LogFiles {
    attempts: File,
    guidance: File,
    guidance_raw: File,
    outcomes: File,
}

impl LogFiles {
    fn open(dir: &Path) -> std::io::Result<Self> {
        let open = |name: &str| OpenOptions::new().create(true).append(true).open(dir.join(name));
        Ok(Self {
            attempts: open(ATTEMPTS_LOG)?,
            guidance: open(GUIDANCE_LOG)?,
            guidance_raw: open(GUIDANCE_RAW_LOG)?,
            outcomes: open(OUTCOMES_LOG)?,
        })
    }
}

fn write_line(file: &mut File, value: &impl Serialize) -> std::io::Result<()> {
    let mut line = serde_json::to_string(value).map_err(std::io::Error::other)?;
    line.push('\n');
    file.write_all(line.as_bytes())
}

/// Streams records to the shared log files as the pipeline produces them.
struct StreamSink<'a> {
    logs: &'a Mutex<LogFiles>,
    error: &'a Mutex<Option<std::io::Error>>,
}

impl StreamSink<'_> {
    fn with(&self, f: impl FnOnce(&mut LogFiles) -> std::io::Result<()>) {
        let mut logs = self.logs.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(e) = f(&mut logs) {
            self.error.lock().unwrap_or_else(|e| e.into_inner()).get_or_insert(e);
        }
    }
}

impl RunSink for StreamSink<'_> {
    fn attempt(&mut self, theorem: &str, attempt: &ProofAttempt) {
        self.with(|l| write_line(&mut l.attempts, &attempt.log_line(theorem)));
    }

    fn guidance(&mut self, theorem: &str, call: &GuidanceCall) {
        let hashed = GuidanceLogLine {
            theorem: theorem.to_string(),
            task: call.task,
            seconds: call.seconds,
            response_sha256: sha256_hex(&call.response),
        };
        let raw = GuidanceRawLine {
            theorem: theorem.to_string(),
            task: call.task,
            seconds: call.seconds,
            response: call.response.clone(),
        };
        self.with(|l| {
            write_line(&mut l.guidance, &hashed)?;
            write_line(&mut l.guidance_raw, &raw)
        });
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

/// Run every entry and write the logs and report into `opts.out`, with model
/// clients and verifier sessions built from the config.
pub fn run_benchmark(config: &RunConfig, entries: &[DatasetEntry], opts: &RunOptions) -> Result<RunResult, HarnessError> {
    config.validate()?;
    let clients = Clients::from_config(config)?;
    let pool = config.verifier.build_pool(config.sessions());
    run_benchmark_with(config, entries, opts, &clients, &pool)
}

/// [`run_benchmark`] with caller-supplied clients and sessions.
pub fn run_benchmark_with(
    config: &RunConfig,
    entries: &[DatasetEntry],
    opts: &RunOptions,
    clients: &Clients,
    pool: &SessionPool,
) -> Result<RunResult, HarnessError> {
    config.validate()?;
    let templates = match &config.templates_dir {
        Some(dir) => TemplateSet::with_overrides(dir).map_err(|e| HarnessError::Config(e.to_string()))?,
        None => TemplateSet::default(),
    };
    let tasks = entries
        .iter()
        .map(|e| e.to_task(&config.preamble))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let out = &opts.out;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;

    let hash = config.hash();
    let names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
    let done = if opts.resume { prepare_resume(out, &hash, &names)? } else { fresh_start(out)? };
    let manifest = RunManifest { config_hash: hash, config: config.clone() };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(out.join(RUN_FILE), manifest_json).map_err(|e| io_err(out, e))?;

    let pending: Vec<usize> = (0..tasks.len()).filter(|&i| !done.contains(&entries[i].name)).collect();
    tracing::info!(total = tasks.len(), resumed = done.len(), pending = pending.len(), "starting run");

    let logs = Mutex::new(LogFiles::open(out).map_err(|e| io_err(out, e))?);
    let write_error: Mutex<Option<std::io::Error>> = Mutex::new(None);
    let next = AtomicUsize::new(0);
    let workers = config.workers.min(pending.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&t) = pending.get(i) else { break };
                let task = &tasks[t];
                let mut session = pool.lease();
                let clock = config.clock();
                let mut sink = StreamSink { logs: &logs, error: &write_error };
                let outcome = run_pipeline(
                    task,
                    &config.pipeline,
                    clients.endpoints(),
                    &templates,
                    &mut *session,
                    &*clock,
                    &mut sink,
                );
                drop(session);
                tracing::info!(
                    theorem = %task.name,
                    solved = outcome.solved,
                    calls = outcome.ledger.consumed,
                    failure = outcome.infrastructure_failure.as_deref().unwrap_or(""),
                    "theorem finished"
                );
                sink.with(|l| write_line(&mut l.outcomes, &outcome));
            });
        }
    });
    drop(logs);
    if let Some(e) = write_error.into_inner().unwrap_or_else(|e| e.into_inner()) {
        return Err(io_err(out, e));
    }

    canonicalize(out, &names)?;
    let report = report_from_dir(out, &opts.ks)?;
    fs::write(out.join(REPORT_JSON), report.to_json()).map_err(|e| io_err(out, e))?;
    fs::write(out.join(REPORT_TABLE), report.to_table()).map_err(|e| io_err(out, e))?;
    Ok(RunResult { report, executed: pending.len() })
}

fn fresh_start(out: &Path) -> Result<HashSet<String>, HarnessError> {
    for name in [ATTEMPTS_LOG, GUIDANCE_LOG, GUIDANCE_RAW_LOG, OUTCOMES_LOG, REPORT_JSON, REPORT_TABLE] {
        let path = out.join(name);
        if path.exists() {
            fs::remove_file(&path).map_err(|e| io_err(&path, e))?;
        }
    }
    Ok(HashSet::new())
}

/// Keep the records of theorems that finished cleanly under the same config
/// and drop everything else so those theorems rerun from scratch.
fn prepare_resume(out: &Path, hash: &str, names: &[&str]) -> Result<HashSet<String>, HarnessError> {
    let run_file = out.join(RUN_FILE);
    if !run_file.exists() {
        return fresh_start(out);
    }
    let text = fs::read_to_string(&run_file).map_err(|e| io_err(&run_file, e))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| io_err(&run_file, e))?;
    if manifest.config_hash != hash {
        return Err(HarnessError::ResumeMismatch { found: manifest.config_hash, expected: hash.to_string() });
    }
    let in_dataset: HashSet<&str> = names.iter().copied().collect();
    let mut done = HashSet::new();
    for line in read_lines(&out.join(OUTCOMES_LOG))? {
        // a torn final line from a crash is simply not a finished theorem
        if let Ok(o) = serde_json::from_str::<TheoremOutcome>(&line) {
            if o.infrastructure_failure.is_none() && in_dataset.contains(o.task.as_str()) {
                done.insert(o.task);
            }
        }
    }
    for (file, key) in LOG_KEYS {
        let path = out.join(file);
        let mut seen = HashSet::new();
        let kept: Vec<String> = read_lines(&path)?
            .into_iter()
            .filter(|l| match theorem_of(l, key) {
                Some(t) if done.contains(&t) => file != OUTCOMES_LOG || seen.insert(t),
                _ => false,
            })
            .collect();
        write_lines(&path, &kept)?;
    }
    Ok(done)
}

const LOG_KEYS: [(&str, &str); 4] =
    [(ATTEMPTS_LOG, "theorem"), (GUIDANCE_LOG, "theorem"), (GUIDANCE_RAW_LOG, "theorem"), (OUTCOMES_LOG, "task")];

fn theorem_of(line: &str, key: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    v.get(key)?.as_str().map(str::to_string)
}

fn read_lines(path: &Path) -> Result<Vec<String>, HarnessError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    BufReader::new(file)
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .collect::<Result<_, _>>()
        .map_err(|e| io_err(path, e))
}

fn write_lines(path: &Path, lines: &[String]) -> Result<(), HarnessError> {
    let mut text = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    let tmp = path.with_extension("jsonl.tmp");
    fs::write(&tmp, text).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Reorder every log into dataset order. Lines of one theorem keep their
/// relative order, so the files no longer depend on worker scheduling.
fn canonicalize(out: &Path, names: &[&str]) -> Result<(), HarnessError> {
    let rank: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    for (file, key) in LOG_KEYS {
        let path = out.join(file);
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for line in read_lines(&path)? {
            let r = theorem_of(&line, key)
                .and_then(|t| rank.get(t.as_str()).copied())
                .ok_or_else(|| io_err(&path, format!("record for unknown theorem: {line}")))?;
            groups.entry(r).or_default().push(line);
        }
        write_lines(&path, &groups.into_values().flatten().collect::<Vec<_>>())?;
    }
    Ok(())
}

fn parse_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| io_err(path, format!("line {}: {e}", i + 1))))
        .collect()
}

/// Rebuild the report purely from the files of a run directory.
pub fn report_from_dir(dir: &Path, ks: &[u32]) -> Result<RunReport, HarnessError> {
    let run_file = dir.join(RUN_FILE);
    let text = fs::read_to_string(&run_file).map_err(|e| io_err(&run_file, e))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| io_err(&run_file, e))?;
    let outcomes: Vec<TheoremOutcome> = parse_lines(&dir.join(OUTCOMES_LOG))?;
    let attempts: Vec<AttemptLogLine> = parse_lines(&dir.join(ATTEMPTS_LOG))?;
    let guidance: Vec<GuidanceLogLine> = parse_lines(&dir.join(GUIDANCE_LOG))?;
    Ok(RunReport::build(&manifest.config, &outcomes, &attempts, &guidance, ks))
}
