//! Line-oriented text format for sheaves on finite posets:
//!
//! ```text
//! # Sierpinski space with a nonzero generization
//! field q
//! elements closed open
//! le closed open
//! dim closed 1
//! dim open 1
//! map closed open [[1]]
//! ```
//!
//! Omitted dimensions are 0 and omitted maps are zero. Maps are given on
//! covering relations only.

use std::sync::Arc;

use super::poset::FinitePoset;
use super::sheaf::CellularSheaf;
use crate::error::{Error, Result};
use crate::exactla::{Field, Matrix};

fn perr(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

/// Parses `[[a,b],[c,d]]`; entries may be quoted. An empty matrix is `[]`.
pub fn parse_matrix_literal(field: Field, rows: usize, cols: usize, s: &str) -> Result<Matrix> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace() && *c != '"').collect();
    let inner = compact
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("matrix literal {s:?} must be bracketed")))?;
    let mut text: Vec<Vec<String>> = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('[')
            .ok_or_else(|| Error::Parse(format!("bad row in {s:?}")))?;
        let end = body.find(']').ok_or_else(|| Error::Parse(format!("unclosed row in {s:?}")))?;
        let row = &body[..end];
        text.push(if row.is_empty() {
            vec![]
        } else {
            row.split(',').map(str::to_string).collect()
        });
        rest = &body[end + 1..];
        rest = rest.strip_prefix(',').unwrap_or(rest);
    }
    // a k^0 -> k^c map may be written [] and a k^c -> k^0 map as [] or [[],...]
    if rows == 0 && text.iter().all(Vec::is_empty) {
        return Ok(Matrix::zeros(field, 0, cols));
    }
    if cols == 0 && text.len() == rows && text.iter().all(Vec::is_empty) {
        return Ok(Matrix::zeros(field, rows, 0));
    }
    Matrix::from_text_rows(field, rows, cols, &text)
}

pub fn matrix_literal(m: &Matrix) -> String {
    let rows: Vec<String> = m.to_text_rows().iter().map(|r| format!("[{}]", r.join(","))).collect();
    format!("[{}]", rows.join(","))
}

/// Reads the `dim`/`map` block over a known poset; `label` resolves element names.
pub(crate) fn parse_cellular_block<'a>(
    field: Field,
    poset: Arc<FinitePoset>,
    lines: impl Iterator<Item = (usize, &'a str)>,
    label: &dyn Fn(&str) -> Option<usize>,
) -> Result<CellularSheaf> {
    let n = poset.len();
    let mut dims = vec![0usize; n];
    let mut raw_maps: Vec<(usize, usize, usize, String)> = Vec::new();
    for (no, line) in lines {
        let mut parts = line.splitn(2, char::is_whitespace);
        let key = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("").trim();
        let find = |name: &str| label(name).ok_or_else(|| perr(no, format!("unknown element {name:?}")));
        match key {
            "dim" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(perr(no, "expected `dim <element> <n>`"));
                }
                dims[find(toks[0])?] = toks[1].parse().map_err(|_| perr(no, "bad dimension"))?;
            }
            "dims" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != n {
                    return Err(perr(no, format!("expected {n} dimensions")));
                }
                for (d, t) in dims.iter_mut().zip(toks) {
                    *d = t.parse().map_err(|_| perr(no, "bad dimension"))?;
                }
            }
            "map" => {
                let mut toks = rest.splitn(3, char::is_whitespace);
                let a = find(toks.next().unwrap_or(""))?;
                let b = find(toks.next().unwrap_or(""))?;
                let lit = toks.next().ok_or_else(|| perr(no, "missing matrix"))?.to_string();
                raw_maps.push((no, a, b, lit));
            }
            _ => return Err(perr(no, format!("unexpected directive {key:?}"))),
        }
    }
    let mut maps: Vec<Matrix> = poset
        .hasse()
        .iter()
        .map(|&(a, b)| Matrix::zeros(field, dims[b], dims[a]))
        .collect();
    for (no, a, b, lit) in raw_maps {
        let i = poset.hasse_index(a, b).ok_or_else(|| {
            perr(no, format!("{} < {} is not a covering relation", poset.label(a), poset.label(b)))
        })?;
        maps[i] = parse_matrix_literal(field, dims[b], dims[a], &lit).map_err(|e| perr(no, e))?;
    }
    CellularSheaf::new(field, poset, dims, maps)
}

pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses a `.tp` document. A `field` line overrides `default_field`.
pub fn parse_poset_sheaf(text: &str, default_field: Field) -> Result<CellularSheaf> {
    let mut field = default_field;
    let mut labels: Option<Vec<String>> = None;
    let mut relations: Vec<(String, String, usize)> = Vec::new();
    let mut body = Vec::new();
    for (no, line) in content_lines(text) {
        let mut parts = line.splitn(2, char::is_whitespace);
        let key = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("").trim();
        match key {
            "field" => field = rest.parse().map_err(|e| perr(no, e))?,
            "elements" => labels = Some(rest.split_whitespace().map(str::to_string).collect()),
            "le" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(perr(no, "expected `le <a> <b>`"));
                }
                relations.push((toks[0].to_string(), toks[1].to_string(), no));
            }
            _ => body.push((no, line)),
        }
    }
    let labels = labels.ok_or_else(|| Error::Parse("missing `elements` line".into()))?;
    let index = |name: &str| labels.iter().position(|l| l == name);
    let mut rel = Vec::new();
    for (a, b, no) in &relations {
        let ia = index(a).ok_or_else(|| perr(*no, format!("unknown element {a:?}")))?;
        let ib = index(b).ok_or_else(|| perr(*no, format!("unknown element {b:?}")))?;
        rel.push((ia, ib));
    }
    let poset = Arc::new(FinitePoset::new(labels.clone(), &rel)?);
    let p2 = poset.clone();
    parse_cellular_block(field, poset, body.into_iter(), &|s| p2.index_of(s))
}

pub fn write_poset_sheaf(f: &CellularSheaf) -> String {
    let p = f.poset();
    let mut out = format!("field {}\nelements {}\n", f.field(), p.labels().join(" "));
    for &(a, b) in p.hasse() {
        out += &format!("le {} {}\n", p.label(a), p.label(b));
    }
    for q in 0..p.len() {
        out += &format!("dim {} {}\n", p.label(q), f.dim(q));
    }
    for (&(a, b), m) in p.hasse().iter().zip(f.edge_maps()) {
        if !m.is_zero() {
            out += &format!("map {} {} {}\n", p.label(a), p.label(b), matrix_literal(m));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# zigzag\nelements e1 v e2\nle v e1\nle v e2\ndim e1 1\ndim v 1\ndim e2 2\nmap v e1 [[1]]\nmap v e2 [[1],[-1/2]]\n";
        let f = parse_poset_sheaf(text, Field::Rational).unwrap();
        assert_eq!(f.dims(), &[1, 1, 2]);
        let again = parse_poset_sheaf(&write_poset_sheaf(&f), Field::Rational).unwrap();
        assert_eq!(again.dims(), f.dims());
        assert_eq!(again.edge_maps(), f.edge_maps());
    }

    #[test]
    fn rejects_bad_input() {
        let missing = "le a b\n";
        assert!(parse_poset_sheaf(missing, Field::Rational).is_err());
        let shape = "elements a b\nle a b\ndim a 1\ndim b 1\nmap a b [[1,2]]\n";
        assert!(parse_poset_sheaf(shape, Field::Rational).is_err());
        let cycle = "elements a b\nle a b\nle b a\n";
        assert!(parse_poset_sheaf(cycle, Field::Rational).is_err());
    }

    #[test]
    fn field_line_and_empty_matrices() {
        let text = "field fp:3\nelements a b\nle a b\ndim b 2\nmap a b [[],[]]\n";
        let f = parse_poset_sheaf(text, Field::Rational).unwrap();
        assert_eq!(f.field(), Field::prime(3).unwrap());
        assert_eq!(parse_matrix_literal(Field::Rational, 0, 2, "[]").unwrap().shape(), (0, 2));
    }
}
