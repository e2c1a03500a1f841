//! Text format for constructible sheaves on the line:
//!
//! ```text
//! field q
//! endpoints 0 1
//! dims 0 1 1 1 0
//! map {0} (0,1) [[1]]
//! map {1} (0,1) [[1]]
//! ```
//!
//! Cells are named as they print (`(-inf,0)`, `{0}`, `(0,1)`, ...) or by
//! their index from the left. `dims` lists all `2m + 1` stalks; `dim <cell> n`
//! sets one. Maps go from a vertex to an adjacent edge.

use super::{cell_poset, ConstructibleTSheaf};
use crate::cellsheaf::{content_lines, matrix_literal, parse_cellular_block};
use crate::error::{Error, Result};
use crate::exactla::Field;
use crate::lineorder::{CellComplex, Rat};

pub fn parse_line_sheaf(text: &str, default_field: Field) -> Result<ConstructibleTSheaf> {
    let mut field = default_field;
    let mut endpoints: Option<Vec<Rat>> = None;
    let mut body = Vec::new();
    for (no, line) in content_lines(text) {
        let mut parts = line.splitn(2, char::is_whitespace);
        let key = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("").trim();
        match key {
            "field" => field = rest.parse().map_err(|e| Error::Parse(format!("line {no}: {e}")))?,
            "endpoints" => {
                let mut pts = rest
                    .split_whitespace()
                    .map(|t| t.parse::<Rat>().map_err(|_| Error::Parse(format!("line {no}: bad endpoint {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                let n = pts.len();
                pts.sort();
                pts.dedup();
                if pts.len() != n {
                    return Err(Error::Parse(format!("line {no}: repeated endpoint")));
                }
                endpoints = Some(pts);
            }
            _ => body.push((no, line)),
        }
    }
    let complex = CellComplex::new(endpoints.unwrap_or_default());
    let poset = cell_poset(&complex);
    let p2 = poset.clone();
    let n = complex.len();
    let label = move |s: &str| p2.index_of(s).or_else(|| s.parse::<usize>().ok().filter(|&i| i < n));
    let sheaf = parse_cellular_block(field, poset, body.into_iter(), &label)?;
    ConstructibleTSheaf::new(complex, sheaf)
}

pub fn write_line_sheaf(f: &ConstructibleTSheaf) -> String {
    let c = f.complex();
    let pts: Vec<String> = c.endpoints().iter().map(|e| e.to_string()).collect();
    let dims: Vec<String> = f.sheaf().dims().iter().map(|d| d.to_string()).collect();
    let mut out = format!("field {}\nendpoints {}\ndims {}\n", f.field(), pts.join(" "), dims.join(" "));
    for (&(a, b), m) in c.hasse().iter().zip(f.sheaf().edge_maps()) {
        if !m.is_zero() {
            out += &format!("map {} {} {}\n", c.cell(a), c.cell(b), matrix_literal(m));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineorder::{SemilinearOpen, SemilinearSet};

    #[test]
    fn constant_on_interval() {
        let text = "endpoints 0 1\ndims 0 1 1 1 0\nmap 1 2 [[1]]\nmap 3 2 [[1]]\n";
        let f = parse_line_sheaf(text, Field::Rational).unwrap();
        let k = ConstructibleTSheaf::constant(Field::Rational, &SemilinearSet::parse("[0,1]").unwrap());
        assert!(f.is_isomorphic(&k).unwrap());
        assert_eq!(f.section_dim(&SemilinearOpen::parse("(-1,2)").unwrap()).unwrap(), 1);
    }

    #[test]
    fn round_trip_with_cell_names() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        let f = ConstructibleTSheaf::random(&mut rng, Field::Rational, vec![Rat::from_integer((-1).into()), Rat::new(1.into(), 2.into())], 2);
        let text = write_line_sheaf(&f);
        assert_eq!(parse_line_sheaf(&text, Field::prime(5).unwrap()).unwrap(), f);
    }

    #[test]
    fn rejects_maps_off_the_order() {
        let text = "endpoints 0 1\ndims 1 1 1 1 1\nmap 0 2 [[1]]\n";
        assert!(parse_line_sheaf(text, Field::Rational).is_err());
        assert!(parse_line_sheaf("endpoints 0 0\n", Field::Rational).is_err());
    }
}
