//! Semilinear subsets of the rational line.
//!
//! A [`SemilinearSet`] is a finite disjoint union of points and open intervals
//! kept in a canonical sorted form, so structural equality is set equality.
//! The distinguished family on the line is the bounded open sets.

mod cells;
mod rwqc;
mod tloc;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exactla::{format_rational, parse_rational};

pub use cells::{exhaustion_chain, Cell, CellComplex};
pub use rwqc::{
    cover_finite_subcover, lwc_validate, rwqc, rwqc_witness, standard_coverings, LwcReport, WitnessCovering,
};
pub use tloc::{is_tloc_open, TlocOpen};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    rat(n, 1)
}

/// A point of the extended line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    NegInf,
    Finite(Rat),
    PosInf,
}

impl Endpoint {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Endpoint::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Result<Endpoint> {
        match s.trim() {
            "-inf" => Ok(Endpoint::NegInf),
            "+inf" | "inf" => Ok(Endpoint::PosInf),
            t => Ok(Endpoint::Finite(parse_rational(t)?)),
        }
    }
}

impl From<Rat> for Endpoint {
    fn from(q: Rat) -> Self {
        Endpoint::Finite(q)
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => write!(f, "-inf"),
            Endpoint::PosInf => write!(f, "+inf"),
            Endpoint::Finite(q) => write!(f, "{}", format_rational(q)),
        }
    }
}

/// A rational strictly between `a` and `b` (which satisfy `a < b`).
pub fn sample_between(a: &Endpoint, b: &Endpoint) -> Rat {
    match (a, b) {
        (Endpoint::NegInf, Endpoint::PosInf) => Rat::zero(),
        (Endpoint::NegInf, Endpoint::Finite(q)) => q - Rat::one(),
        (Endpoint::Finite(q), Endpoint::PosInf) => q + Rat::one(),
        (Endpoint::Finite(p), Endpoint::Finite(q)) => (p + q) / int(2),
        _ => panic!("empty interval ({a},{b})"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    Point(Rat),
    /// Open interval `(a, b)` with `a < b`.
    Open(Endpoint, Endpoint),
}

impl Piece {
    fn contains(&self, x: &Rat) -> bool {
        match self {
            Piece::Point(q) => q == x,
            Piece::Open(a, b) => {
                let x = Endpoint::Finite(x.clone());
                *a < x && x < *b
            }
        }
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Point(q) => write!(f, "{{{}}}", format_rational(q)),
            Piece::Open(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// A finite union of points and open intervals in canonical form: sorted,
/// pairwise disjoint, and with no two pieces forming a larger piece.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SemilinearSet {
    pieces: Vec<Piece>,
}

impl SemilinearSet {
    pub fn empty() -> Self {
        SemilinearSet::default()
    }

    pub fn line() -> Self {
        SemilinearSet {
            pieces: vec![Piece::Open(Endpoint::NegInf, Endpoint::PosInf)],
        }
    }

    pub fn point(q: Rat) -> Self {
        SemilinearSet {
            pieces: vec![Piece::Point(q)],
        }
    }

    /// The open interval `(a, b)`; empty when `a >= b`.
    pub fn open(a: Endpoint, b: Endpoint) -> Self {
        if a >= b {
            return SemilinearSet::empty();
        }
        SemilinearSet {
            pieces: vec![Piece::Open(a, b)],
        }
    }

    pub fn open_q(a: Rat, b: Rat) -> Self {
        SemilinearSet::open(Endpoint::Finite(a), Endpoint::Finite(b))
    }

    /// `(a, b)` with integer endpoints.
    pub fn interval(a: i64, b: i64) -> Self {
        SemilinearSet::open_q(int(a), int(b))
    }

    /// The closed interval `[a, b]`.
    pub fn closed_q(a: Rat, b: Rat) -> Self {
        if a > b {
            return SemilinearSet::empty();
        }
        SemilinearSet::point(a.clone())
            .union(&SemilinearSet::point(b.clone()))
            .union(&SemilinearSet::open_q(a, b))
    }

    pub fn from_pieces(pieces: Vec<Piece>) -> Self {
        pieces.into_iter().fold(SemilinearSet::empty(), |acc, p| {
            let s = match p {
                Piece::Point(q) => SemilinearSet::point(q),
                Piece::Open(a, b) => SemilinearSet::open(a, b),
            };
            acc.union(&s)
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    /// The finite points where the set may change: all piece endpoints.
    pub fn endpoints(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        for p in &self.pieces {
            match p {
                Piece::Point(q) => out.push(q.clone()),
                Piece::Open(a, b) => {
                    out.extend(a.finite().cloned());
                    out.extend(b.finite().cloned());
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn is_open(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p, Piece::Open(..)))
    }

    pub fn is_bounded(&self) -> bool {
        self.pieces.iter().all(|p| match p {
            Piece::Point(_) => true,
            Piece::Open(a, b) => a.finite().is_some() && b.finite().is_some(),
        })
    }

    /// Infimum and supremum, `None` for the empty set.
    pub fn hull(&self) -> Option<(Endpoint, Endpoint)> {
        let lo = match self.pieces.first()? {
            Piece::Point(q) => Endpoint::Finite(q.clone()),
            Piece::Open(a, _) => a.clone(),
        };
        let hi = match self.pieces.last()? {
            Piece::Point(q) => Endpoint::Finite(q.clone()),
            Piece::Open(_, b) => b.clone(),
        };
        Some((lo, hi))
    }

    /// Rebuilds a canonical set from a membership predicate evaluated on the
    /// cells cut out by `points`.
    fn from_cells(points: &[Rat], member: impl Fn(&Rat) -> bool) -> Self {
        let n = points.len();
        let mut cells: Vec<(bool, bool)> = Vec::with_capacity(2 * n + 1); // (is_vertex, member)
        let ep = |i: isize| -> Endpoint {
            if i < 0 {
                Endpoint::NegInf
            } else if i as usize >= n {
                Endpoint::PosInf
            } else {
                Endpoint::Finite(points[i as usize].clone())
            }
        };
        for i in 0..=n {
            let s = sample_between(&ep(i as isize - 1), &ep(i as isize));
            cells.push((false, member(&s)));
            if i < n {
                cells.push((true, member(&points[i])));
            }
        }
        let mut pieces = Vec::new();
        let mut i = 0;
        while i < cells.len() {
            if !cells[i].1 {
                i += 1;
                continue;
            }
            let start = i;
            while i + 1 < cells.len() && cells[i + 1].1 {
                i += 1;
            }
            let end = i;
            let mut first_edge = start;
            if cells[start].0 {
                pieces.push(Piece::Point(points[(start - 1) / 2].clone()));
                first_edge += 1;
            }
            let mut last_edge = end;
            let mut trailing = None;
            if cells[end].0 && end > start {
                last_edge -= 1;
                trailing = Some(Piece::Point(points[(end - 1) / 2].clone()));
            }
            if first_edge <= last_edge {
                pieces.push(Piece::Open(ep(first_edge as isize / 2 - 1), ep(last_edge as isize / 2)));
            }
            pieces.extend(trailing);
            i += 1;
        }
        SemilinearSet { pieces }
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        let mut pts = self.endpoints();
        pts.extend(other.endpoints());
        pts.sort();
        pts.dedup();
        SemilinearSet::from_cells(&pts, |x| op(self.contains(x), other.contains(x)))
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn diff(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        SemilinearSet::line().diff(self)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.diff(other).is_empty()
    }

    pub fn closure(&self) -> Self {
        let mut out = self.clone();
        for e in self.endpoints() {
            out = out.union(&SemilinearSet::point(e));
        }
        out
    }

    pub fn interior(&self) -> Self {
        self.complement().closure().complement()
    }

    pub fn boundary(&self) -> Self {
        self.closure().diff(&self.interior())
    }

    /// Translate by `t`.
    pub fn shift(&self, t: &Rat) -> Self {
        let mv = |e: &Endpoint| match e {
            Endpoint::Finite(q) => Endpoint::Finite(q + t),
            other => other.clone(),
        };
        SemilinearSet {
            pieces: self
                .pieces
                .iter()
                .map(|p| match p {
                    Piece::Point(q) => Piece::Point(q + t),
                    Piece::Open(a, b) => Piece::Open(mv(a), mv(b)),
                })
                .collect(),
        }
    }

    /// Parses `"(0,1)+{1}+(1,2)"`. Closed and half-open brackets are accepted
    /// and expanded into canonical pieces; `"empty"` is the empty set.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "empty" {
            return Ok(SemilinearSet::empty());
        }
        let bad = |m: &str| Error::Parse(format!("bad set syntax {s:?}: {m}"));
        let mut out = SemilinearSet::empty();
        for part in split_pieces(s) {
            let part = part.trim();
            if let Some(inner) = part.strip_prefix('{').and_then(|p| p.strip_suffix('}')) {
                for q in inner.split(',') {
                    out = out.union(&SemilinearSet::point(parse_rational(q)?));
                }
                continue;
            }
            let open_l = part.starts_with('(');
            let closed_l = part.starts_with('[');
            let open_r = part.ends_with(')');
            let closed_r = part.ends_with(']');
            if !(open_l || closed_l) || !(open_r || closed_r) {
                return Err(bad("expected a bracketed interval or braces"));
            }
            let inner = &part[1..part.len() - 1];
            let (a, b) = inner.split_once(',').ok_or_else(|| bad("missing comma"))?;
            let a = Endpoint::parse(a)?;
            let b = Endpoint::parse(b)?;
            if a > b {
                return Err(bad("left end exceeds right end"));
            }
            let mut piece = SemilinearSet::open(a.clone(), b.clone());
            if closed_l {
                let q = a.finite().ok_or_else(|| bad("closed at infinity"))?;
                piece = piece.union(&SemilinearSet::point(q.clone()));
            }
            if closed_r {
                let q = b.finite().ok_or_else(|| bad("closed at infinity"))?;
                piece = piece.union(&SemilinearSet::point(q.clone()));
            }
            out = out.union(&piece);
        }
        Ok(out)
    }

    /// Uniform random set whose pieces have endpoints on the grid `k/den` in `[lo, hi]`.
    pub fn random<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64, open_only: bool) -> Self {
        let mut grid: Vec<Rat> = (lo * den..=hi * den).map(|k| rat(k, den)).collect();
        grid.sort();
        let mut chosen: Vec<Rat> = grid.into_iter().filter(|_| rng.gen_bool(0.3)).collect();
        chosen.dedup();
        let n = chosen.len();
        let mut set = SemilinearSet::empty();
        for i in 0..=n {
            let a = if i == 0 { None } else { Some(chosen[i - 1].clone()) };
            let b = chosen.get(i).cloned();
            if let (Some(a), Some(b)) = (a, b) {
                if rng.gen_bool(0.5) {
                    set = set.union(&SemilinearSet::open_q(a, b));
                }
            }
            if !open_only && i < n && rng.gen_bool(0.2) {
                set = set.union(&SemilinearSet::point(chosen[i].clone()));
            }
        }
        set
    }
}

/// Splits on `+` separators between pieces while keeping `+inf` intact.
fn split_pieces(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' | '{' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' | '}' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out.into_iter().filter(|p| !p.trim().is_empty()).collect()
}

impl fmt::Display for SemilinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "empty");
        }
        let parts: Vec<String> = self.pieces.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

impl std::str::FromStr for SemilinearSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SemilinearSet::parse(s)
    }
}

/// An open semilinear set. Bounded ones form the distinguished family `T`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SemilinearOpen(SemilinearSet);

impl SemilinearOpen {
    pub fn new(set: SemilinearSet) -> Result<Self> {
        if !set.is_open() {
            return Err(Error::NotOpen(format!("{set} is not open")));
        }
        Ok(SemilinearOpen(set))
    }

    pub fn empty() -> Self {
        SemilinearOpen(SemilinearSet::empty())
    }

    pub fn line() -> Self {
        SemilinearOpen(SemilinearSet::line())
    }

    pub fn interval(a: i64, b: i64) -> Self {
        SemilinearOpen(SemilinearSet::interval(a, b))
    }

    pub fn open_q(a: Rat, b: Rat) -> Self {
        SemilinearOpen(SemilinearSet::open_q(a, b))
    }

    pub fn open(a: Endpoint, b: Endpoint) -> Self {
        SemilinearOpen(SemilinearSet::open(a, b))
    }

    pub fn parse(s: &str) -> Result<Self> {
        SemilinearOpen::new(SemilinearSet::parse(s)?)
    }

    pub fn as_set(&self) -> &SemilinearSet {
        &self.0
    }

    pub fn into_set(self) -> SemilinearSet {
        self.0
    }

    pub fn union(&self, other: &Self) -> Self {
        SemilinearOpen(self.0.union(&other.0))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        SemilinearOpen(self.0.intersect(&other.0))
    }

    /// Removing a closed set keeps the result open.
    pub fn minus_closed(&self, closed: &SemilinearSet) -> Self {
        debug_assert_eq!(closed.closure(), *closed);
        SemilinearOpen(self.0.diff(closed))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Membership in `T`: bounded.
    pub fn is_t_open(&self) -> bool {
        self.0.is_bounded()
    }

    /// Connected components, one per interval piece.
    pub fn components(&self) -> Vec<SemilinearOpen> {
        self.0
            .pieces
            .iter()
            .map(|p| SemilinearOpen(SemilinearSet { pieces: vec![p.clone()] }))
            .collect()
    }

    pub fn component_count(&self) -> usize {
        self.0.pieces.len()
    }

    pub fn intervals(&self) -> Vec<(Endpoint, Endpoint)> {
        self.0
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Open(a, b) => (a.clone(), b.clone()),
                Piece::Point(_) => unreachable!("open sets have no point pieces"),
            })
            .collect()
    }

    /// `U ∩ (−n, n)`.
    pub fn truncate(&self, n: i64) -> Self {
        self.intersect(&SemilinearOpen::interval(-n, n))
    }

    /// Each component `(a, b)` shrunk to `(a + 1/n, b − 1/n)`, then truncated to
    /// `(−n, n)`. The closure of the result lies in `self`, and the results
    /// exhaust `self` as `n` grows.
    pub fn shrink(&self, n: i64) -> Self {
        assert!(n >= 1);
        let eps = rat(1, n);
        let mut out = SemilinearSet::empty();
        for (a, b) in self.intervals() {
            let a = match a {
                Endpoint::Finite(q) => Endpoint::Finite(q + &eps),
                inf => inf,
            };
            let b = match b {
                Endpoint::Finite(q) => Endpoint::Finite(q - &eps),
                inf => inf,
            };
            out = out.union(&SemilinearSet::open(a, b));
        }
        SemilinearOpen(out).truncate(n)
    }

    /// Open `ε`-neighbourhood of a closed bounded set.
    pub fn neighbourhood(closed: &SemilinearSet, eps: &Rat) -> Self {
        let mut out = SemilinearSet::empty();
        for p in closed.pieces() {
            let (a, b) = match p {
                Piece::Point(q) => (q.clone(), q.clone()),
                Piece::Open(Endpoint::Finite(a), Endpoint::Finite(b)) => (a.clone(), b.clone()),
                Piece::Open(..) => panic!("neighbourhood of an unbounded set"),
            };
            out = out.union(&SemilinearSet::open_q(a - eps, b + eps));
        }
        SemilinearOpen(out)
    }

    pub fn random<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Self {
        SemilinearOpen(SemilinearSet::random(rng, lo, hi, den, true))
    }
}

impl fmt::Display for SemilinearOpen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::ops::Deref for SemilinearOpen {
    type Target = SemilinearSet;
    fn deref(&self) -> &SemilinearSet {
        &self.0
    }
}

/// Distance from a point of an open set to its complement (`None` if infinite).
pub(crate) fn depth_in(u: &SemilinearOpen, x: &Rat) -> Option<Rat> {
    for (a, b) in u.intervals() {
        let inside = Endpoint::Finite(x.clone());
        if a < inside && inside < b {
            let left = a.finite().map(|a| x - a);
            let right = b.finite().map(|b| b - x);
            return match (left, right) {
                (Some(l), Some(r)) => Some(if l < r { l } else { r }),
                (Some(l), None) => Some(l),
                (None, Some(r)) => Some(r),
                (None, None) => None,
            };
        }
    }
    Some(Rat::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> SemilinearSet {
        SemilinearSet::parse(t).unwrap()
    }

    #[test]
    fn union_keeps_missing_point() {
        let u = s("(0,1)").union(&s("(1,2)"));
        assert_eq!(u.pieces().len(), 2);
        assert_eq!(u.to_string(), "(0,1)+(1,2)");
        assert_eq!(u.union(&s("{1}")), s("(0,2)"));
    }

    #[test]
    fn intersection_of_overlapping_intervals() {
        assert_eq!(s("(0,2)").intersect(&s("(1,3)")), s("(1,2)"));
    }

    #[test]
    fn complement_of_unit_interval() {
        let c = s("(0,1)").complement();
        assert_eq!(c.to_string(), "(-inf,0)+{0}+{1}+(1,+inf)");
        assert!(c.contains(&int(0)));
        assert!(!c.contains(&rat(1, 2)));
        assert!(c.contains(&int(1)));
    }

    #[test]
    fn canonical_form_of_closed_and_half_open() {
        assert_eq!(s("[0,1)").to_string(), "{0}+(0,1)");
        assert_eq!(s("[1,2]").to_string(), "{1}+(1,2)+{2}");
        assert_eq!(s("{0}+(0,1)+{1}+(1,2)"), s("[0,2)"));
        assert_eq!(s("empty"), SemilinearSet::empty());
        assert_eq!(s("(-inf,+inf)"), SemilinearSet::line());
        assert!(SemilinearSet::parse("(0,1").is_err());
    }

    #[test]
    fn openness_and_boundedness() {
        let u = SemilinearOpen::parse("(0,1)+(2,3)").unwrap();
        assert!(u.is_t_open());
        assert_eq!(u.component_count(), 2);
        assert!(!SemilinearOpen::parse("(0,+inf)").unwrap().is_t_open());
        assert!(SemilinearOpen::empty().is_t_open());
        assert!(SemilinearOpen::parse("[0,1)").is_err());
    }

    #[test]
    fn closure_interior_boundary() {
        let a = s("(0,1)+{2}");
        assert_eq!(a.closure(), s("[0,1]+{2}"));
        assert_eq!(a.interior(), s("(0,1)"));
        assert_eq!(a.boundary(), s("{0,1,2}"));
    }

    #[test]
    fn shrink_stays_inside() {
        let u = SemilinearOpen::parse("(0,1)+(2,+inf)").unwrap();
        let v = u.shrink(4);
        assert_eq!(v.to_string(), "(1/4,3/4)+(9/4,4)");
        assert!(v.closure().is_subset(u.as_set()));
    }
}
