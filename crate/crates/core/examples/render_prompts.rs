// Render every built-in prompt template with sample bindings.

use guided_prover::lean::embed_summary;
use guided_prover::model::{enumerate_lemmas, TemplateId, TemplateSet};

fn main() {
    let templates = TemplateSet::default();
    let formal = "theorem t (x : ℝ) (h : 3 * x + 2 = 11) : x = 3";
    let informal = "If 3x + 2 = 11, show that x = 3.";
    let nl = "Subtract 2 from both sides, then divide by 3.";
    let lemmas = enumerate_lemmas(["3 * x = 9", "x = 9 / 3"]);
    let code = embed_summary(formal, "import Mathlib", "We want to show that x = 3. Subtract 2, divide by 3.").unwrap();
    let bindings = [
        ("formal_statement", formal),
        ("informal_statement", informal),
        ("nl_proof", nl),
        ("lemmas", lemmas.as_str()),
        ("code", code.as_str()),
    ];
    for id in TemplateId::ALL {
        let text = templates.render(id, &bindings).unwrap();
        println!("===== {} ({} chars) =====", id.as_str(), text.len());
        println!("{}\n", text.lines().take(6).collect::<Vec<_>>().join("\n"));
    }
    let prover = templates.render(TemplateId::ProverCot, &bindings).unwrap();
    assert!(prover.ends_with("-/\n"));
}
