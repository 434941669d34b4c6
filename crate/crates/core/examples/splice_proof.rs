// Build the lemma and main theorems for a two-lemma decomposition, then
// splice proven pieces into the final proof.

use guided_prover::lean::{build_lemma_theorem, build_main_theorem, extract_have_statements, splice_final_proof};
use guided_prover::task::{Lemma, LemmaSelection, Provenance, ProvenSet, TheoremTask};

fn main() {
    let task = TheoremTask::new(
        "amc12_2000_p5",
        "theorem amc12_2000_p5 (x p : ℝ) (h₀ : x < 2) (h₁ : abs (x - 2) = p) : x - p = 2 * x - 2",
        "If |x - 2| = p with x < 2, then x - p = 2x - 2.",
        "import Mathlib",
    )
    .unwrap();
    let selection = LemmaSelection::from_lemmas(vec![
        Lemma::new("l_0", "x - 2 < 0"),
        Lemma::new("l_1", "abs (x - 2) = -(x - 2)"),
    ]);

    for i in 0..selection.m() {
        println!("{}\n", build_lemma_theorem(&task, &selection, i).unwrap().body);
    }
    println!("{}\n", build_main_theorem(&task, &selection).unwrap().body);

    let mut proven = ProvenSet::new();
    proven.insert(0, "linarith", Provenance::Salvaged).unwrap();
    proven.insert(1, "rw [abs_of_neg l_0]", Provenance::LoopProved).unwrap();
    let full = splice_final_proof(&task, &selection, &proven, "rw [l_1] at h₁\nlinarith").unwrap();
    println!("{full}");

    let back: Vec<_> = extract_have_statements(&full.body).into_iter().map(|l| l.statement_text).collect();
    assert_eq!(back, ["x - 2 < 0", "abs (x - 2) = -(x - 2)"]);
}
