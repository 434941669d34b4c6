// Pull `have` statements out of a failed prover attempt and merge them into
// a deduplicated lemma pool.

use guided_prover::lean::{dedupe_pool, extract_have_statements};

const ATTEMPT_1: &str = r#"theorem mathd_algebra_10 (x : ℝ) (h₀ : 3 * x + 2 = 11) : x = 3 := by
  /- Subtract 2 and divide by 3. -/
  -- have ignored : False := by trivial
  have h₁ : 3 * x = 9 := by linarith
  have h₂ : x = 9 / 3 := by
    field_simp
    linarith
  have : (9 : ℝ) / 3 = 3 := by norm_num
  linarith
"#;

const ATTEMPT_2: &str = r#"theorem mathd_algebra_10 (x : ℝ) (h₀ : 3 * x + 2 = 11) : x = 3 := by
  have key : 3 * x  =  9 := by nlinarith [h₀]
  have ⟨y, hy⟩ : ∃ y : ℝ, y = x := ⟨x, rfl⟩
  linarith
"#;

fn main() {
    let mut lemmas = Vec::new();
    for (i, attempt) in [ATTEMPT_1, ATTEMPT_2].into_iter().enumerate() {
        for lemma in extract_have_statements(attempt) {
            let proof = lemma.proof_text().map(|p| p.text.replace('\n', "; ")).unwrap_or_default();
            println!("attempt {}: {} : {}  [{}]", i + 1, lemma.binder_name, lemma.statement_text, proof);
            lemmas.push(lemma.from_attempt(i as u32 + 1));
        }
    }
    let pool = dedupe_pool(lemmas);
    println!("\npool of {}:", pool.len());
    for l in &pool {
        println!("  {:<24} seen in {:?}, {} proof(s)", l.normalized_statement(), l.source_attempts, l.proofs.len());
    }
    assert_eq!(pool.len(), 4);
    assert_eq!(pool[0].source_attempts.len(), 2);
}
