//! The acceptance criteria, one line each. Run with
//! `cargo test -p tsite-core --test acceptance -- --nocapture`.

use tsite::suite::{run_item, ItemResult};

const CRITERIA: &[(&str, &[&str])] = &[
    ("1 fufu: ρ⁻¹ρ_*F ≅ F", &["fufu"]),
    ("2 UlimU: colimits of sections", &["UlimU"]),
    ("3 isiuei: two-open gluing", &["isiuei"]),
    ("4 rhoUsa: two constructions of k_U", &["rhoUsa"]),
    ("5 coherence: presentations and stability", &["teo_coh_stable"]),
    ("6 ρ_! adjunction and distinguishing example", &["eta_adjunction", "eta_distinguishing"]),
    ("7 flabby theory", &["flabby_theory", "gamma_z"]),
    ("8 c-soft theory", &["csoft"]),
    ("9 T_loc flabbiness", &["tflc"]),
    ("10 spectrum equivalence", &["isosites"]),
    ("11 facKK/facK", &["facKK"]),
    ("12 oracle guards", &["oracle_guards"]),
];

#[test]
fn acceptance_criteria() {
    let seed = std::env::var("TSITE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut failed = Vec::new();
    let mut details = String::new();
    for (name, ids) in CRITERIA {
        let items: Vec<ItemResult> = ids.iter().map(|id| run_item(id, seed, 1).expect("known item")).collect();
        let ok = items.iter().all(ItemResult::passed);
        let counts: Vec<String> = items.iter().map(|i| format!("{} {}", i.id, i.outcome.instances)).collect();
        println!("{} criterion {name} [{}]", if ok { "PASS" } else { "FAIL" }, counts.join(", "));
        for i in &items {
            if let Some(n) = &i.outcome.note {
                details.push_str(&format!("  {}: {n}\n", i.id));
            }
            for f in i.outcome.failures.iter().take(3) {
                details.push_str(&format!("  {} witness: {f}\n", i.id));
            }
        }
        if !ok {
            failed.push(*name);
        }
    }
    print!("{details}");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
