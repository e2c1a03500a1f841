//! Symbolic points of the spectrum of the line.
//!
//! An ultrafilter of semilinear sets containing a bounded open is determined
//! by a rational point (it contains the singleton), a one-sided germ at a
//! rational point, or an irrational cut. Cuts are given by rational bounds and
//! may only be queried against data with no endpoint in between.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exactla::Matrix;
use crate::lineorder::{int, Rat, SemilinearOpen};
use crate::tsheaf::{ConstructibleTSheaf, TSheafMap};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UltraPoint {
    Principal(Rat),
    /// Contains the sets that contain `(q, q + ε)` for some `ε > 0`.
    RightGerm(Rat),
    LeftGerm(Rat),
    /// An irrational strictly between the bounds.
    Cut(Rat, Rat),
}

impl fmt::Display for UltraPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UltraPoint::Principal(q) => write!(f, "{q}"),
            UltraPoint::RightGerm(q) => write!(f, "{q}+"),
            UltraPoint::LeftGerm(q) => write!(f, "{q}-"),
            UltraPoint::Cut(a, b) => write!(f, "cut({a},{b})"),
        }
    }
}

impl FromStr for UltraPoint {
    type Err = Error;

    /// `1`, `1+`, `1-`, `cut(1,2)`. Germs at infinity are rejected: they
    /// contain no bounded open.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad point {s:?}"));
        let q = |t: &str| t.trim().parse::<Rat>().map_err(|_| bad());
        if s.contains("inf") {
            return Err(Error::PointNotRepresentable(format!(
                "{s}: no bounded open belongs to a germ at infinity"
            )));
        }
        if let Some(inner) = s.strip_prefix("cut(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            let (a, b) = (q(a)?, q(b)?);
            if a >= b {
                return Err(Error::PointNotRepresentable(format!("empty cut interval in {s}")));
            }
            return Ok(UltraPoint::Cut(a, b));
        }
        if let Some(x) = s.strip_suffix('+') {
            return Ok(UltraPoint::RightGerm(q(x)?));
        }
        if let Some(x) = s.strip_suffix('-') {
            if !x.is_empty() {
                return Ok(UltraPoint::LeftGerm(q(x)?));
            }
        }
        Ok(UltraPoint::Principal(q(s)?))
    }
}

impl UltraPoint {
    /// A rational point that lies in exactly the sets with endpoints among
    /// `ends` that the ultrafilter contains.
    fn witness(&self, ends: &[Rat]) -> Result<Rat> {
        match self {
            UltraPoint::Principal(q) => Ok(q.clone()),
            UltraPoint::RightGerm(q) => {
                let next = ends.iter().filter(|e| *e > q).min();
                Ok(next.map_or_else(|| q + int(1), |e| (q + e) / int(2)))
            }
            UltraPoint::LeftGerm(q) => {
                let prev = ends.iter().filter(|e| *e < q).max();
                Ok(prev.map_or_else(|| q - int(1), |e| (q + e) / int(2)))
            }
            UltraPoint::Cut(a, b) => {
                if let Some(e) = ends.iter().find(|e| *e >= a && *e <= b) {
                    return Err(Error::PointNotRepresentable(format!(
                        "endpoint {e} lies in the cut interval [{a},{b}]"
                    )));
                }
                Ok((a + b) / int(2))
            }
        }
    }

    /// A point with the same stalks as the ultrafilter on any sheaf whose
    /// endpoints are `ends`, together with whether it is a vertex.
    pub fn cell_in(&self, ends: &[Rat]) -> Result<(Rat, bool)> {
        let x = self.witness(ends)?;
        let vertex = matches!(self, UltraPoint::Principal(_));
        Ok((x, vertex))
    }
}

/// `α ∈ Ũ`.
pub fn membership(alpha: &UltraPoint, u: &SemilinearOpen) -> Result<bool> {
    Ok(u.as_set().contains(&alpha.witness(&u.endpoints())?))
}

fn located(f: &ConstructibleTSheaf, alpha: &UltraPoint) -> Result<(ConstructibleTSheaf, usize)> {
    let extra: Vec<Rat> = match alpha {
        UltraPoint::Principal(q) | UltraPoint::RightGerm(q) | UltraPoint::LeftGerm(q) => vec![q.clone()],
        UltraPoint::Cut(..) => vec![],
    };
    let g = f.refine(&extra);
    let x = alpha.witness(g.endpoints())?;
    let i = g.complex().locate(&x);
    Ok((g, i))
}

/// The stalk at a symbolic point, as a dimension.
pub fn stalk_at(f: &ConstructibleTSheaf, alpha: &UltraPoint) -> Result<usize> {
    let (g, i) = located(f, alpha)?;
    Ok(g.sheaf().dim(i))
}

/// The map induced on stalks.
pub fn stalk_map(phi: &TSheafMap, alpha: &UltraPoint) -> Result<Matrix> {
    let mut extra = Vec::new();
    if let UltraPoint::Principal(q) | UltraPoint::RightGerm(q) | UltraPoint::LeftGerm(q) = alpha {
        extra.push(q.clone());
    }
    let (c, _) = phi.complex().refine(&extra);
    let fine = phi.refine_to(&c)?;
    let x = alpha.witness(c.endpoints())?;
    Ok(fine.map.comps[c.locate(&x)].clone())
}

/// The symbolic points that detect properties of a map: each endpoint with
/// its two germs, and a cut inside each bounded edge and a point beyond
/// each end.
pub fn detecting_points(ends: &[Rat]) -> Vec<UltraPoint> {
    let mut sorted = ends.to_vec();
    sorted.sort();
    sorted.dedup();
    let ends = &sorted[..];
    let mut out = Vec::new();
    for q in ends {
        out.push(UltraPoint::Principal(q.clone()));
        out.push(UltraPoint::LeftGerm(q.clone()));
        out.push(UltraPoint::RightGerm(q.clone()));
    }
    for w in ends.windows(2) {
        let g = &w[1] - &w[0];
        out.push(UltraPoint::Cut(&w[0] + &g / int(3), &w[1] - &g / int(3)));
    }
    match (ends.first(), ends.last()) {
        (Some(a), Some(b)) => {
            out.push(UltraPoint::Principal(a - int(1)));
            out.push(UltraPoint::Principal(b + int(1)));
        }
        _ => out.push(UltraPoint::Principal(int(0))),
    }
    out
}

/// Mono, epi and iso read off the stalks at the detecting points.
pub fn stalkwise_properties(phi: &TSheafMap) -> Result<(bool, bool, bool)> {
    let mut mono = true;
    let mut epi = true;
    for alpha in detecting_points(phi.complex().endpoints()) {
        let m = stalk_map(phi, &alpha)?;
        mono &= m.is_injective();
        epi &= m.is_surjective();
    }
    Ok((mono, epi, mono && epi))
}

/// `Γ(U; F)` as the limit of the stalks at symbolic points over the cells of `U`.
pub fn sections_from_stalks(f: &ConstructibleTSheaf, u: &SemilinearOpen) -> Result<usize> {
    use crate::exactla::FinDiagram;
    let g = f.refine(&u.endpoints());
    let c = g.complex();
    let pts = detecting_points(c.endpoints());
    let mut cells: Vec<(usize, UltraPoint)> = Vec::new();
    for alpha in pts {
        let (x, _) = alpha.cell_in(c.endpoints())?;
        let i = c.locate(&x);
        if u.as_set().contains(&x) && !cells.iter().any(|(j, _)| *j == i) {
            cells.push((i, alpha));
        }
    }
    let mut d = FinDiagram::new(g.field(), cells.iter().map(|(_, a)| stalk_at(&g, a)).collect::<Result<Vec<_>>>()?);
    for (s, (i, _)) in cells.iter().enumerate() {
        for (t, (j, _)) in cells.iter().enumerate() {
            if c.is_vertex(*i) && !c.is_vertex(*j) && (*j + 1 == *i || *i + 1 == *j) {
                d.add_arrow(s, t, g.sheaf().map(*i, *j))?;
            }
        }
    }
    Ok(d.limit()?.dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::Field;
    use crate::lineorder::SemilinearSet;

    fn p(s: &str) -> UltraPoint {
        s.parse().unwrap()
    }

    #[test]
    fn membership_by_tag() {
        let u = SemilinearOpen::parse("(0,1)").unwrap();
        assert!(membership(&p("0+"), &u).unwrap());
        assert!(!membership(&p("1"), &u).unwrap());
        assert!(membership(&p("1-"), &u).unwrap());
        assert!(!membership(&p("1+"), &u).unwrap());
        assert!(membership(&p("cut(1/3,1/2)"), &u).unwrap());
        assert!(membership(&p("cut(1/2,2)"), &u).is_err());
        assert!("+inf-".parse::<UltraPoint>().is_err());
        assert_eq!(p("-1/2-"), UltraPoint::LeftGerm(Rat::new((-1).into(), 2.into())));
    }

    #[test]
    fn stalks() {
        let q = Field::Rational;
        let f = ConstructibleTSheaf::constant(q, &SemilinearSet::parse("(0,1)").unwrap());
        assert_eq!([stalk_at(&f, &p("1-")), stalk_at(&f, &p("1")), stalk_at(&f, &p("1+"))].map(Result::unwrap), [1, 0, 0]);
        let kx = ConstructibleTSheaf::constant(q, &SemilinearSet::line());
        assert!(["0", "5+", "-3-", "cut(1,2)"].iter().all(|s| stalk_at(&kx, &p(s)).unwrap() == 1));
        let sky = ConstructibleTSheaf::skyscraper(q, int(1));
        assert_eq!([stalk_at(&sky, &p("1")), stalk_at(&sky, &p("1+")), stalk_at(&sky, &p("0"))].map(Result::unwrap), [1, 0, 0]);
    }
}
