//! Scripted end-to-end pipeline scenarios over mock endpoints.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use guided_prover::clock::TickClock;
use guided_prover::lean::LeanSource;
use guided_prover::model::{FnClient, ModelError, Role, ScriptEntry, ScriptedClient, TemplateSet};
use guided_prover::orchestrator::{run_pipeline, Endpoints, MemorySink, PipelineConfig, PipelinePhase};
use guided_prover::task::{TheoremOutcome, TheoremTask, VerificationResult};
use guided_prover::verifier::MockVerifier;

pub const FAIL: &str = "  -- no luck\n  fail\n```";
pub const OK: &str = "  trivial\n```";
pub const SPIN: &str = "  SPIN\n```";
pub const STATEMENT: &str = "theorem t (x : ℝ) (h : 3 * x + 2 = 11) : x = 3";

/// A failed attempt carrying three haves; only the first has a working proof.
pub const WITH_HAVES: &str = "  -- isolate the linear term\n  have h1 : 3 * x = 9 := by linarith\n  have h2 : x = 9 / 3 := by\n    fail\n  have h3 : x > 0 := by\n    fail\n  fail\n```";

pub const NL_PROOF: &str = "Subtract 2 from both sides to get 3x = 9, then divide by 3.";
pub const SUMMARY: &str = "We want to show that x = 3. Subtract 2, then divide by 3.";

pub fn selection_response(stmts: &[&str]) -> String {
    let mut s = String::from("**LEMMA ANALYSIS**\n0:\nAnalysis: fine\nEvaluation: correct\n\n**CHOSEN LEMMAS:**\n");
    for (i, st) in stmts.iter().enumerate() {
        s.push_str(&format!("have l_{i} : {st} := by\n"));
    }
    s
}

pub fn lemma_proofs_response(m: usize) -> String {
    let mut s = String::from("**REASONING:**\nStraightforward.\n\n**STEPS:**\n");
    for i in 0..m {
        s.push_str(&format!("l_{i}:\nstep {i}\n**Proof:**\nArithmetic for step {i}.\n\n"));
    }
    s.push_str("**Final Proof:**\nCombine the steps.\n");
    s
}

pub fn task() -> TheoremTask {
    TheoremTask::new("t", STATEMENT, "If 3x + 2 = 11 then x = 3.", "import Mathlib").unwrap()
}

pub fn repeat(text: &str, n: usize) -> Vec<String> {
    vec![text.to_string(); n]
}

type Rule = fn(&LeanSource) -> Option<VerificationResult>;

#[derive(Clone)]
pub enum ProverScript {
    Texts(Vec<String>),
    /// Fails with an unavailable endpoint on this 0-based call.
    DownAt(Vec<String>, u64),
}

#[derive(Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub config: PipelineConfig,
    pub reasoner: Vec<ScriptEntry>,
    pub worker: Vec<ScriptEntry>,
    pub prover: ProverScript,
    pub rule: Option<Rule>,
    pub expect: Expect,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expect {
    pub solved: bool,
    pub consumed: u32,
    pub trace: Vec<PipelinePhase>,
}

pub struct Ran {
    pub outcome: TheoremOutcome,
    pub sink: MemorySink,
    /// Prover calls that returned a completion.
    pub prover_calls: u64,
    /// Prover calls including transport failures.
    pub prover_requests: u64,
    pub checked: Vec<LeanSource>,
}

impl Scenario {
    pub fn run(&self) -> Ran {
        let task = task();
        let reasoner = ScriptedClient::new(Role::Reasoner, self.reasoner.clone());
        let worker = ScriptedClient::new(Role::Worker, self.worker.clone());
        let (texts, down) = match &self.prover {
            ProverScript::Texts(t) => (t.clone(), None),
            ProverScript::DownAt(t, n) => (t.clone(), Some(*n)),
        };
        let served = Arc::new(AtomicU64::new(0));
        let counter = served.clone();
        let prover = FnClient::new(Role::Prover, move |_, n| {
            if Some(n) == down {
                return Err(ModelError::Unavailable { role: Role::Prover, attempts: 5, reason: "scripted".into() });
            }
            let text = texts.get(n as usize).cloned().ok_or(ModelError::ScriptExhausted { role: Role::Prover, context: "t".into() })?;
            counter.fetch_add(1, Ordering::SeqCst);
            Ok(text)
        });
        let mut verifier = match self.rule {
            Some(rule) => MockVerifier::with_rule(rule),
            None => MockVerifier::new(),
        };
        let templates = TemplateSet::default();
        let clock = TickClock::new(Duration::from_millis(250));
        let mut sink = MemorySink::default();
        let endpoints = Endpoints { reasoner: &reasoner, worker: &worker, prover: &prover };
        let outcome = run_pipeline(&task, &self.config, endpoints, &templates, &mut verifier, &clock, &mut sink);
        Ran { outcome, sink, prover_calls: served.load(Ordering::SeqCst), prover_requests: prover.calls(), checked: verifier.history().to_vec() }
    }
}

fn guided() -> (Vec<ScriptEntry>, Vec<ScriptEntry>) {
    (
        vec![ScriptEntry::text(NL_PROOF)],
        vec![
            ScriptEntry::text(SUMMARY),
            ScriptEntry::text(selection_response(&["3 * x = 9", "x = 9 / 3", "x > 0"])),
            ScriptEntry::text(lemma_proofs_response(3)),
        ],
    )
}

fn concat(parts: &[Vec<String>]) -> Vec<String> {
    parts.concat()
}

use PipelinePhase::*;

fn decomposed(tail: &[PipelinePhase]) -> Vec<PipelinePhase> {
    let mut t = vec![InitialAttempts, LemmaSelection, Salvage, MainSketch];
    t.extend_from_slice(tail);
    t
}

fn reject_assembly(src: &LeanSource) -> Option<VerificationResult> {
    (src.body.starts_with("theorem t (") && src.body.contains("have l_0 :")).then(|| MockVerifier::judge("fail", Duration::ZERO))
}

fn reject_lemma_2(src: &LeanSource) -> Option<VerificationResult> {
    src.body.starts_with("theorem t_lemma_2").then(|| MockVerifier::judge("fail", Duration::ZERO))
}

fn transport_failure(src: &LeanSource) -> Option<VerificationResult> {
    src.body.contains("BROKEN").then(|| VerificationResult::transport_error("REPL crashed twice", 0.0))
}

/// The suite: success at each stage, exhaustion at each stage, empty pool,
/// empty selection and degraded guidance.
pub fn catalogue() -> Vec<Scenario> {
    let base = PipelineConfig::default();
    let (r, w) = guided();
    let mut out = Vec::new();
    let mut push = |name, config: PipelineConfig, reasoner: Vec<ScriptEntry>, worker: Vec<ScriptEntry>, prover: ProverScript, rule: Option<Rule>, expect: Expect| {
        out.push(Scenario { name, config, reasoner, worker, prover, rule, expect })
    };
    let texts = ProverScript::Texts;

    push("initial success on call 3", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(FAIL, 2), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 3, trace: vec![InitialAttempts, Solved] });

    push("initial success on call 1 leaves later script unused", base.clone(), r.clone(), w.clone(),
        texts(repeat(OK, 10)), None,
        Expect { solved: true, consumed: 1, trace: vec![InitialAttempts, Solved] });

    push("initial success on the last initial call", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(FAIL, 15), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 16, trace: vec![InitialAttempts, Solved] });

    push("empty pool falls back and exhausts", base.clone(), r.clone(), w.clone(),
        texts(repeat(FAIL, 128)), None,
        Expect { solved: false, consumed: 128, trace: vec![InitialAttempts, LemmaSelection, Fallback, Exhausted] });

    push("fallback success on its first call", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(FAIL, 16), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 17, trace: vec![InitialAttempts, LemmaSelection, Fallback, Solved] });

    push("full decomposition with one salvaged lemma", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 16), repeat("  linarith [l_0, l_1, l_2]\n```", 1), repeat(OK, 2)])), None,
        Expect { solved: true, consumed: 19, trace: decomposed(&[LemmaLoop, Assembly, Solved]) });

    push("all lemmas salvaged, loop needs no calls", base.clone(), r.clone(),
        vec![
            ScriptEntry::text(SUMMARY),
            ScriptEntry::text(selection_response(&["3 * x = 9"])),
            ScriptEntry::text(lemma_proofs_response(1)),
        ],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat("  linarith [l_0]\n```", 1)])), None,
        Expect { solved: true, consumed: 17, trace: decomposed(&[LemmaLoop, Assembly, Solved]) });

    push("lemma proved on the second pass", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 1), repeat(FAIL, 1), repeat(OK, 1), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 20, trace: decomposed(&[LemmaLoop, Assembly, Solved]) });

    push("main sketch success on its third call", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(FAIL, 2), repeat(OK, 3)])), None,
        Expect { solved: true, consumed: 21, trace: decomposed(&[LemmaLoop, Assembly, Solved]) });

    push("main sketch fails eight times then fallback exhausts", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(FAIL, 112)])), None,
        Expect { solved: false, consumed: 128, trace: decomposed(&[Fallback, Exhausted]) });

    push("main sketch fails then fallback solves", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(FAIL, 8), repeat(FAIL, 4), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 29, trace: decomposed(&[Fallback, Solved]) });

    push("budget runs out inside the main sketch", PipelineConfig { budget: 19, ..base.clone() }, r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(FAIL, 3)])), None,
        Expect { solved: false, consumed: 19, trace: decomposed(&[Exhausted]) });

    push("unprovable lemma exhausts the loop", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 1), repeat(OK, 111)])), Some(reject_lemma_2),
        Expect { solved: false, consumed: 128, trace: decomposed(&[LemmaLoop, Exhausted]) });

    push("assembly anomaly terminates", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 3)])), Some(reject_assembly),
        Expect { solved: false, consumed: 19, trace: decomposed(&[LemmaLoop, Assembly, LemmaLoop, Exhausted]) });

    push("selection without a chosen section falls back", base.clone(), r.clone(),
        vec![ScriptEntry::text(SUMMARY), ScriptEntry::text("I like lemma 0."), ScriptEntry::text("Still no section.")],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(FAIL, 111), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 128, trace: vec![InitialAttempts, LemmaSelection, Fallback, Solved] });

    push("selection of lemmas outside the pool falls back", base.clone(), r.clone(),
        vec![ScriptEntry::text(SUMMARY), ScriptEntry::text(selection_response(&["x = 42"]))],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 17, trace: vec![InitialAttempts, LemmaSelection, Fallback, Solved] });

    push("selection endpoint down falls back", base.clone(), r.clone(),
        vec![ScriptEntry::text(SUMMARY), ScriptEntry::failure("unavailable")],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 17, trace: vec![InitialAttempts, LemmaSelection, Fallback, Solved] });

    push("reasoner down degrades to empty summary and fallback", base.clone(),
        vec![ScriptEntry::failure("unavailable")], vec![],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(FAIL, 5), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 22, trace: vec![InitialAttempts, LemmaSelection, Fallback, Solved] });

    push("summary down still selects lemmas", base.clone(), r.clone(),
        vec![
            ScriptEntry::failure("unavailable"),
            ScriptEntry::text(selection_response(&["3 * x = 9", "x = 9 / 3", "x > 0"])),
            ScriptEntry::text(lemma_proofs_response(3)),
        ],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 3)])), None,
        Expect { solved: true, consumed: 19, trace: decomposed(&[LemmaLoop, Assembly, Solved]) });

    push("informal lemma proofs down degrade but continue", base.clone(), r.clone(),
        vec![
            ScriptEntry::text(SUMMARY),
            ScriptEntry::text(selection_response(&["3 * x = 9", "x = 9 / 3", "x > 0"])),
            ScriptEntry::failure("unavailable"),
        ],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 3)])), None,
        Expect { solved: true, consumed: 19, trace: decomposed(&[LemmaLoop, Assembly, Solved]) });

    push("informal lemma proofs missing a step degrade", base.clone(), r.clone(),
        vec![
            ScriptEntry::text(SUMMARY),
            ScriptEntry::text(selection_response(&["3 * x = 9", "x = 9 / 3", "x > 0"])),
            ScriptEntry::text(lemma_proofs_response(2)),
            ScriptEntry::text(lemma_proofs_response(2)),
        ],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 3)])), None,
        Expect { solved: true, consumed: 19, trace: decomposed(&[LemmaLoop, Assembly, Solved]) });

    push("initial attempts equal to budget exhaust directly", PipelineConfig { budget: 16, ..base.clone() }, r.clone(), w.clone(),
        texts(repeat(FAIL, 16)), None,
        Expect { solved: false, consumed: 16, trace: vec![InitialAttempts, Exhausted] });

    push("zero initial attempts", PipelineConfig { initial_attempts: 0, budget: 4, ..base.clone() }, r.clone(), w.clone(),
        texts(repeat(FAIL, 4)), None,
        Expect { solved: false, consumed: 4, trace: vec![InitialAttempts, LemmaSelection, Fallback, Exhausted] });

    push("informal proof only never selects", PipelineConfig { lemma_guidance: false, ..base.clone() }, r.clone(), w.clone(),
        texts(concat(&[repeat(WITH_HAVES, 40), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 41, trace: vec![InitialAttempts, Solved] });

    push("informal proof only exhausts the budget", PipelineConfig { lemma_guidance: false, ..base.clone() }, r.clone(), w.clone(),
        texts(repeat(WITH_HAVES, 128)), None,
        Expect { solved: false, consumed: 128, trace: vec![InitialAttempts, Exhausted] });

    push("lemma guidance only", PipelineConfig { informal_guidance: false, ..base.clone() }, r.clone(),
        vec![ScriptEntry::text(selection_response(&["3 * x = 9", "x = 9 / 3", "x > 0"]))],
        texts(concat(&[repeat(WITH_HAVES, 16), repeat(OK, 3)])), None,
        Expect { solved: true, consumed: 19, trace: decomposed(&[LemmaLoop, Assembly, Solved]) });

    push("timeouts count as failed attempts", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(SPIN, 3), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 4, trace: vec![InitialAttempts, Solved] });

    push("prover endpoint down aborts the theorem", base.clone(), r.clone(), w.clone(),
        ProverScript::DownAt(repeat(FAIL, 16), 4), None,
        Expect { solved: false, consumed: 4, trace: vec![InitialAttempts, Exhausted] });

    push("verifier failure aborts the theorem", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat(FAIL, 2), repeat("  BROKEN\n```", 1)])), Some(transport_failure),
        Expect { solved: false, consumed: 3, trace: vec![InitialAttempts, Exhausted] });

    push("empty completions fail without verification", base.clone(), r.clone(), w.clone(),
        texts(concat(&[repeat("```", 2), repeat(OK, 1)])), None,
        Expect { solved: true, consumed: 3, trace: vec![InitialAttempts, Solved] });

    out
}

pub fn find(name: &str) -> Scenario {
    catalogue().into_iter().find(|s| s.name == name).unwrap_or_else(|| panic!("no scenario `{name}`"))
}

/// Budget and log invariants every scenario must satisfy.
pub fn check_invariants(name: &str, ran: &Ran) -> Result<(), String> {
    use guided_prover::orchestrator::is_legal_trace;
    use guided_prover::task::{sha256_hex, BudgetLedger, GuidanceLogLine, Stage, VerificationStatus};

    let o = &ran.outcome;
    let fail = |what: String| Err(format!("{name}: {what}"));
    if o.ledger.consumed as u64 != ran.prover_calls {
        return fail(format!("consumed {} but the prover served {} calls", o.ledger.consumed, ran.prover_calls));
    }
    if o.ledger.consumed > o.ledger.total || o.ledger.total > 128 {
        return fail(format!("consumed {} of {}", o.ledger.consumed, o.ledger.total));
    }
    if o.ledger.consumed != o.ledger.per_stage.values().sum::<u32>() {
        return fail("per-stage counts do not sum to consumed".into());
    }
    if ran.sink.attempts.len() as u32 != o.ledger.consumed {
        return fail(format!("{} persisted attempts", ran.sink.attempts.len()));
    }
    if !is_legal_trace(&o.phase_trace) {
        return fail(format!("illegal trace {:?}", o.phase_trace));
    }
    let indices: Vec<u32> = ran.sink.attempts.iter().map(|(_, a)| a.attempt_index).collect();
    if indices != (1..=o.ledger.consumed).collect::<Vec<_>>() {
        return fail(format!("attempt indices {indices:?}"));
    }
    // stop on success: a proof of the whole theorem is the last call made
    if let Some(first) = ran
        .sink
        .attempts
        .iter()
        .position(|(_, a)| a.verification.is_proved() && matches!(a.stage, Stage::Initial | Stage::Fallback))
    {
        if first + 1 != ran.sink.attempts.len() {
            return fail(format!("{} calls after a complete proof", ran.sink.attempts.len() - first - 1));
        }
    }
    if o.solved && (o.final_proof.is_none() || o.final_status != Some(VerificationStatus::Proved)) {
        return fail("solved without a proved final proof".into());
    }
    let lines: Vec<_> = ran.sink.attempts.iter().map(|(t, a)| a.log_line(t)).collect();
    let guidance: Vec<_> = ran
        .sink
        .guidance
        .iter()
        .map(|(t, c)| GuidanceLogLine {
            theorem: t.clone(),
            task: c.task,
            seconds: c.seconds,
            response_sha256: sha256_hex(&c.response),
        })
        .collect();
    let replayed = BudgetLedger::replay(o.ledger.total, &lines, &guidance).map_err(|e| format!("{name}: {e}"))?;
    if (replayed.consumed, &replayed.per_stage, replayed.guidance_calls)
        != (o.ledger.consumed, &o.ledger.per_stage, o.ledger.guidance_calls)
    {
        return fail("replayed ledger differs".into());
    }
    Ok(())
}

/// Expected solved flag, consumed count and trace.
pub fn check_expect(s: &Scenario, ran: &Ran) -> Result<(), String> {
    let o = &ran.outcome;
    let got = (o.solved, o.ledger.consumed, &o.phase_trace);
    let want = (s.expect.solved, s.expect.consumed, &s.expect.trace);
    if got != want {
        return Err(format!("{}: got {got:?}, expected {want:?}; diagnostics {:?}", s.name, o.diagnostics));
    }
    Ok(())
}
