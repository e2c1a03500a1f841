//! Instance files.
//!
//! `.ts` is a line sheaf and `.tp` a sheaf on a finite poset, both in the
//! library's text formats. A `.tp` file may also carry `tmember a,b` lines
//! naming the members of a distinguished family for `spectrum`.
//!
//! `.tpp` is a presheaf given open by open, after the same `elements` and
//! `le` header:
//!
//! ```text
//! value a,b 2
//! value a 1
//! restrict a,b a [[1,0]]
//! ```
//!
//! Opens are comma-separated labels, `-` for the empty open. `restrict`
//! lines give `P(U) → P(U ∖ {x})` for `x` minimal in `U`; missing values are
//! zero-dimensional and missing restrictions are zero.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use tsite::cellsheaf::{parse_matrix_literal, parse_poset_sheaf, CellularSheaf, FinitePoset, Mask, Presheaf};
use tsite::exactla::{Field, Matrix};
use tsite::tsheaf::{parse_line_sheaf, ConstructibleTSheaf};
use tsite::{Error, Result};

pub enum Instance {
    Line(ConstructibleTSheaf),
    Finite { sheaf: CellularSheaf, members: Option<Vec<Mask>> },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn is_finite(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "tp")
}

pub fn read_instance(path: &Path, field: Field) -> Result<Instance> {
    let text = read(path)?;
    if !is_finite(path) {
        return Ok(Instance::Line(parse_line_sheaf(&text, field)?));
    }
    let (members, rest): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.trim_start().starts_with("tmember"));
    let sheaf = parse_poset_sheaf(&rest.join("\n"), field)?;
    let members = if members.is_empty() {
        None
    } else {
        let m = members
            .iter()
            .map(|l| labels_to_mask(sheaf.poset(), l.trim_start().trim_start_matches("tmember")))
            .collect::<Result<Vec<_>>>()?;
        Some(m)
    };
    Ok(Instance::Finite { sheaf, members })
}

pub fn labels_to_mask(p: &FinitePoset, s: &str) -> Result<Mask> {
    let mut m = p.none();
    let s = s.trim().trim_start_matches('{').trim_end_matches('}');
    if s == "-" || s.is_empty() {
        return Ok(m);
    }
    for name in s.split(',') {
        let i = p
            .index_of(name.trim())
            .ok_or_else(|| Error::Parse(format!("unknown element {:?}", name.trim())))?;
        m[i] = true;
    }
    Ok(m)
}

pub fn read_presheaf(path: &Path, field: Field) -> Result<Presheaf> {
    let text = read(path)?;
    let mut header = Vec::new();
    let mut values = Vec::new();
    let mut restricts = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first() {
            Some(&"value") if toks.len() == 3 => values.push((no + 1, toks[1], toks[2])),
            Some(&"restrict") if toks.len() == 4 => restricts.push((no + 1, toks[1], toks[2], toks[3])),
            Some(&"value") | Some(&"restrict") => return Err(Error::Parse(format!("line {}: malformed {:?}", no + 1, toks[0]))),
            _ => header.push(line),
        }
    }
    // the header parses as a sheaf with all stalks zero
    let base = parse_poset_sheaf(&header.join("\n"), field)?;
    let field = base.field();
    let poset: Arc<FinitePoset> = base.poset().clone();
    let mut dims: HashMap<Mask, usize> = HashMap::new();
    for (no, u, d) in values {
        let m = labels_to_mask(&poset, u)?;
        poset.check_open(&m).map_err(|e| Error::Parse(format!("line {no}: {e}")))?;
        let d = d.parse().map_err(|_| Error::Parse(format!("line {no}: bad dimension {d:?}")))?;
        dims.insert(m, d);
    }
    let mut maps: HashMap<(Mask, Mask), (usize, String)> = HashMap::new();
    for (no, u, v, lit) in restricts {
        maps.insert((labels_to_mask(&poset, u)?, labels_to_mask(&poset, v)?), (no, lit.to_string()));
    }
    let dim = |m: &Mask| dims.get(m).copied().unwrap_or(0);
    let mut bad = None;
    let p = Presheaf::from_fn(field, poset, dim, |u, x, du, dv| {
        let mut v = u.clone();
        v[x] = false;
        match maps.get(&(u.clone(), v)) {
            Some((no, lit)) => parse_matrix_literal(field, dv, du, lit).unwrap_or_else(|e| {
                bad = Some(format!("line {no}: {e}"));
                Matrix::zeros(field, dv, du)
            }),
            None => Matrix::zeros(field, dv, du),
        }
    });
    if let Some(msg) = bad {
        return Err(Error::Parse(msg));
    }
    p
}

pub fn vector(v: &Matrix) -> String {
    let entries: Vec<String> = (0..v.rows()).map(|i| v.get(i, 0).to_text()).collect();
    format!("[{}]", entries.join(","))
}
