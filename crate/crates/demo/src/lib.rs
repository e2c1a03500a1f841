//! Browser bindings. Every export takes and returns plain text so the page
//! stays a textarea and a few buttons.

use tsite::exactla::Field;
use tsite::functors::{rho_star, XSheaf};
use tsite::homalg::{coherent_presentation, is_c_soft, is_flabby};
use tsite::lineorder::SemilinearOpen;
use tsite::tsheaf::{closure_sections_dim, ind_colimit_sections, parse_line_sheaf, rho_shriek_system, ConstructibleTSheaf};
use wasm_bindgen::prelude::*;

fn sheaf(text: &str) -> Result<ConstructibleTSheaf, String> {
    parse_line_sheaf(text, Field::Rational).map_err(|e| e.to_string())
}

fn open(text: &str) -> Result<SemilinearOpen, String> {
    SemilinearOpen::parse(text).map_err(|e| e.to_string())
}

fn report(r: Result<String, String>) -> String {
    r.unwrap_or_else(|e| format!("error: {e}"))
}

pub fn sections_text(sheaf_text: &str, open_text: &str) -> Result<String, String> {
    let f = sheaf(sheaf_text)?;
    let u = open(open_text)?;
    let s = f.sections(&u).map_err(|e| e.to_string())?;
    let mut out = format!("Γ({u}; F) has dimension {}\n", s.dim());
    for b in 0..s.dim() {
        let mut parts = Vec::new();
        for i in (0..s.complex.len()).filter(|&i| s.mask[i]) {
            if let Some(m) = s.sections.component(i) {
                if m.rows() > 0 {
                    let v: Vec<String> = (0..m.rows()).map(|r| m.get(r, b).to_text()).collect();
                    parts.push(format!("{} ↦ ({})", s.complex.cell(i), v.join(", ")));
                }
            }
        }
        out += &format!("  s{b}: {}\n", parts.join("  "));
    }
    Ok(out)
}

pub fn classify_text(sheaf_text: &str) -> Result<String, String> {
    let f = sheaf(sheaf_text)?;
    let e = |e: tsite::Error| e.to_string();
    let flabby = is_flabby(&f).map_err(e)?;
    let soft = is_c_soft(&f).map_err(e)?;
    let p = coherent_presentation(&f).map_err(e)?;
    let mut out = String::new();
    let mut line = |name: &str, holds: bool, why: Option<String>| {
        out += &format!("{name:<9} {}", if holds { "yes" } else { "no" });
        if let Some(w) = why {
            out += &format!("  ({w})");
        }
        out.push('\n');
    };
    line(
        "flabby",
        flabby.holds,
        flabby.witness.map(|w| format!("Γ({}) → Γ({}) has rank {} < {}", w.larger, w.smaller, w.rank, w.smaller_dim)),
    );
    line(
        "c-soft",
        soft.holds,
        soft.witness.map(|w| format!("Γ({}) → Γ({}) has rank {} < {}", w.larger, w.smaller, w.rank, w.smaller_dim)),
    );
    let gens: Vec<String> = p.generators.iter().map(ToString::to_string).collect();
    line("coherent", p.verify() && p.in_t(), Some(format!("generated by k on {}", gens.join(", "))));
    Ok(out)
}

pub fn direct_images_text(sheaf_text: &str, open_text: &str) -> Result<String, String> {
    let f = sheaf(sheaf_text)?;
    let u = open(open_text)?;
    let e = |e: tsite::Error| e.to_string();
    let star = rho_star(&XSheaf::new(f.clone())).section_dim(&u).map_err(e)?;
    let shriek = ind_colimit_sections(&rho_shriek_system(&f), &u).map_err(e)?;
    let germs = closure_sections_dim(&f, &u).map_err(e)?;
    Ok(format!(
        "ρ_* F on {u}: {star}\nρ_! F on {u}: {} (stable from stage {})\ngerms along the closure: {germs}\n",
        shriek.dim, shriek.stable_from
    ))
}

#[wasm_bindgen]
pub fn sections(sheaf_text: &str, open_text: &str) -> String {
    report(sections_text(sheaf_text, open_text))
}

#[wasm_bindgen]
pub fn classify(sheaf_text: &str) -> String {
    report(classify_text(sheaf_text))
}

#[wasm_bindgen]
pub fn direct_images(sheaf_text: &str, open_text: &str) -> String {
    report(direct_images_text(sheaf_text, open_text))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = "field q\nendpoints\ndims 1\n";

    #[test]
    fn operations_on_the_constant_sheaf() {
        assert!(sections(LINE, "(0,1)+(2,3)").starts_with("Γ((0,1)+(2,3); F) has dimension 2"));
        let c = classify(LINE);
        assert!(c.contains("flabby    no") && c.contains("coherent  no"));
        assert!(direct_images(LINE, "(0,1)+(1,2)").contains("ρ_* F on (0,1)+(1,2): 2"));
        assert!(sections("nonsense", "(0,1)").starts_with("error:"));
    }
}
