// Parse the structured answers of the selection and lemma-proof prompts.

use guided_prover::guidance::{parse_chosen_lemmas, parse_step_proofs};

const SELECTION: &str = r#"**LEMMA ANALYSIS**
0: have h1 : 3 * x = 9
Analysis: isolates the linear term.
Evaluation: correct and useful.

**CHOSEN LEMMAS:**
1. `have l_0 : 3 * x = 9 := by`
2. `have l_1 : x = 9 / 3 := by`
"#;

const STEPS: &str = r#"**REASONING:**
Linear equation.

**STEPS:**
l_0:
3 * x = 9
**Proof:** Subtract 2 from both sides of h.

l_1:
x = 9 / 3
**Proof:** Divide l_0 by 3.

**Final Proof:** Simplify 9 / 3 to 3.
"#;

fn main() {
    let chosen = parse_chosen_lemmas(SELECTION).unwrap();
    for c in &chosen {
        println!("{} -> {}", c.label, c.statement);
    }
    let steps = parse_step_proofs(STEPS);
    for (i, p) in &steps.steps {
        println!("p_l_{i}: {p}");
    }
    println!("p_main: {}", steps.final_proof.as_deref().unwrap_or("-"));
    assert_eq!(chosen.len(), 2);
    assert_eq!(steps.steps.len(), 2);
}
