//! Generators for Lean-shaped statements, tactic blocks and splice inputs.

use guided_prover::task::{Lemma, LemmaSelection, Provenance, ProvenSet};
use proptest::prelude::*;
use proptest::sample::select;

pub const ATOMS: &[&str] = &["x", "y", "a + b", "f (x + 1)", "(x - 1) ^ 2", "2 * k", "Real.sqrt 2", "n.succ", "‖v‖", "|x - y|"];
pub const RELATIONS: &[&str] = &["=", "<", "≤", "≠", "∣", ">"];

pub fn atom() -> impl Strategy<Value = String> {
    select(ATOMS).prop_map(str::to_string)
}

/// Propositions of several shapes, some spanning two lines.
pub fn statement() -> impl Strategy<Value = String> {
    prop_oneof![
        (atom(), select(RELATIONS), atom()).prop_map(|(a, r, b)| format!("{a} {r} {b}")),
        (atom(), atom()).prop_map(|(a, b)| format!("∀ n : ℕ, {a} + n = {b} + n")),
        atom().prop_map(|a| format!("∃ k : ℤ, {a} = 2 * k")),
        (atom(), atom()).prop_map(|(a, b)| format!("{a} ∈ {{z : ℝ | z ≤ {b}}}")),
        (atom(), atom()).prop_map(|(a, b)| format!("({a} = {b}) ∧\n      ({b} = {a})")),
        atom().prop_map(|a| format!("(fun t => t + 1) {a} = {a} + 1")),
    ]
}

pub const TACTICS: &[&str] = &[
    "linarith",
    "nlinarith [sq_nonneg (x - 1), sq_nonneg (x + 1)]",
    "norm_num",
    "simp only [mul_comm] at h ⊢",
    "field_simp",
    "ring_nf",
    "exact ⟨_, rfl⟩",
    "constructor <;> linarith",
    "-- have fake : False := sorry_free_text",
    "/- a have inside a comment: have c : True := trivial -/",
    "rcases h with ⟨w, hw⟩",
    "omega",
];

pub fn tactic_block(max: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(select(TACTICS), 1..=max).prop_map(|v| v.join("\n"))
}

/// A block that may also carry nested haves named `h…`.
pub fn tactic_block_with_haves() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            3 => select(TACTICS).prop_map(str::to_string),
            1 => (statement(), select(TACTICS)).prop_map(|(s, t)| format!("have hn : {} := by\n  {t}", s.replace('\n', " "))),
        ],
        1..5,
    )
    .prop_map(|v| v.join("\n"))
}

pub fn theorem() -> impl Strategy<Value = String> {
    select(&[
        "theorem t (x y : ℝ) (h₀ : 0 < x) (h₁ : x < y) : x ^ 2 < y ^ 2",
        "theorem t (n : ℕ) (h : n % 2 = 1) : (n ^ 2) % 2 = 1",
        "theorem t (f : ℝ → ℝ) (hf : ∀ x, f x = 2 * x + 3) : f 2 = 7",
        "theorem t {a b : ℤ} [Fact (0 < a)] (h : a ∣ b) : a ∣ b * b",
    ][..])
    .prop_map(str::to_string)
}

pub fn selection(stmts: &[String]) -> LemmaSelection {
    LemmaSelection::from_lemmas(stmts.iter().enumerate().map(|(i, s)| Lemma::new(format!("l_{i}"), s.as_str())).collect())
}

pub fn proven(proofs: &[String]) -> ProvenSet {
    let mut p = ProvenSet::new();
    for (i, proof) in proofs.iter().enumerate() {
        let prov = if i % 2 == 0 { Provenance::Salvaged } else { Provenance::LoopProved };
        p.insert(i, proof.clone(), prov).unwrap();
    }
    p
}

pub fn triple() -> impl Strategy<Value = (String, Vec<String>, Vec<String>, String)> {
    (1usize..=5).prop_flat_map(|m| {
        (
            theorem(),
            proptest::collection::vec(statement(), m),
            proptest::collection::vec(tactic_block(4), m),
            tactic_block(3),
        )
    })
}

