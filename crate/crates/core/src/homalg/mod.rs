//! Sheaf classes: flabby, c-soft and coherent sheaves, and the criteria
//! characterizing them.
//!
//! On the line every decision reduces to finitely many restriction maps on a
//! refinement of the endpoint set by interior sample points. The reduction
//! rests on refinement invariance: two opens whose endpoints fall in the same
//! cells have isomorphic restriction maps.

mod acyclic;
mod coherent;

use crate::cellsheaf::{mask_diff, CellularSheaf, Mask};
use crate::error::Result;
use crate::lineorder::{int, rat, CellComplex, Rat, SemilinearOpen, SemilinearSet, TlocOpen};
use crate::tsheaf::{ConstructibleTSheaf, LocalModel};

pub(crate) use acyclic::exact3;
pub use acyclic::{
    random_coherent, random_map,
    c_soft_suite, ext_by_long_sequence, flabby_acyclicity_suite, flabby_ext_criterion, random_flabby, random_ses,
    ExtCriterionReport, ShortExact, SuiteReport,
};
pub use coherent::{coherent_presentation, is_coherent, sum_of_constants, CoherentPresentation};

/// A restriction map that fails to be surjective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionWitness {
    pub larger: SemilinearOpen,
    /// The open (flabbiness) or closed (c-softness) set restricted to.
    pub smaller: SemilinearSet,
    pub larger_dim: usize,
    pub smaller_dim: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<RestrictionWitness>,
}

impl Verdict {
    fn from_witness(witness: Option<RestrictionWitness>) -> Self {
        Verdict {
            holds: witness.is_none(),
            witness,
        }
    }
}

/// `per_edge` interior points of every edge, the unbounded ones included.
pub(crate) fn interior_samples(c: &CellComplex, per_edge: usize) -> Vec<Rat> {
    let e = c.endpoints();
    let k = per_edge as i64;
    let Some((lo, hi)) = e.first().zip(e.last()) else {
        return (0..2 * k).map(int).collect();
    };
    let mut out: Vec<Rat> = (1..=k).flat_map(|i| [lo - int(i), hi + int(i)]).collect();
    for w in e.windows(2) {
        for i in 1..=k {
            out.push(&w[0] + (&w[1] - &w[0]) * rat(i, k + 1));
        }
    }
    out
}

/// Checks `Γ(V;F) → Γ(U;F)` for `U ⊆ V`.
pub fn restriction_witness(
    f: &ConstructibleTSheaf,
    v: &SemilinearOpen,
    u: &SemilinearOpen,
) -> Result<Option<RestrictionWitness>> {
    let r = f.restriction(v, u)?;
    Ok((r.rank() < r.rows()).then(|| RestrictionWitness {
        larger: v.clone(),
        smaller: u.as_set().clone(),
        larger_dim: r.cols(),
        smaller_dim: r.rows(),
        rank: r.rank(),
    }))
}

/// Flabbiness on the line. After refining by one interior point per edge it
/// suffices to test, at every vertex `s`, a small interval `V` around `s`
/// against `V ∖ {s}`; any failing pair is returned.
pub fn is_flabby(f: &ConstructibleTSheaf) -> Result<Verdict> {
    let fine = f.complex().refine(&interior_samples(f.complex(), 1)).0;
    let pts = fine.endpoints();
    for (k, s) in pts.iter().enumerate() {
        let left = if k > 0 { s - &pts[k - 1] } else { int(2) };
        let right = if k + 1 < pts.len() { &pts[k + 1] - s } else { int(2) };
        let r = left.min(right) / int(2);
        let v = SemilinearOpen::open_q(s - &r, s + &r);
        let u = v.minus_closed(&SemilinearSet::point(s.clone()));
        if let Some(w) = restriction_witness(f, &v, &u)? {
            return Ok(Verdict::from_witness(Some(w)));
        }
    }
    Ok(Verdict::from_witness(None))
}

/// Flabbiness on a finite poset, with every up-set distinguished: the local
/// condition `F_p → Γ(↑p ∖ p)` surjective at every `p`.
pub fn is_flabby_finite(f: &CellularSheaf) -> Result<Option<(Mask, Mask)>> {
    let p = f.poset();
    for x in 0..p.len() {
        let v = p.up(x);
        let mut point = p.none();
        point[x] = true;
        let u = mask_diff(&v, &point);
        let r = f.restriction_between(&v, &u)?;
        if r.rank() < r.rows() {
            return Ok(Some((v, u)));
        }
    }
    Ok(None)
}

/// Surjectivity of `Γ(X;F) → Γ(U;F)` for one `U ∈ T_loc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalVerdict {
    Surjective,
    /// Fails on the piece of `U` inside `(−stage, stage)`.
    NotSurjective { stage: usize },
    /// Images kept moving within the examined depth.
    Inconclusive,
}

/// Compares, at each stage `n`, the images of `Γ(X_D)` and `Γ(U_D)` in
/// `Γ(U_n)` for the two deepest stages `D`. The images of `Γ(X;F)` and
/// `Γ(U;F)` in `Γ(U_n)` are the stable ones.
pub fn global_restriction<M: LocalModel + ?Sized>(model: &M, u: &TlocOpen, depth: usize) -> Result<GlobalVerdict> {
    let depth = depth.max(3);
    let w = model.window(depth as i64 + 1);
    let stage = |n: usize| u.stage(n as i64);
    let xs = |n: usize| SemilinearOpen::interval(-(n as i64), n as i64);
    let ranks = |d: usize, n: usize| -> Result<(usize, usize)> {
        let un = stage(n)?;
        let rx = w.restriction(&xs(d), &un)?.rank();
        let ru = w.restriction(&stage(d)?, &un)?.rank();
        Ok((rx, ru))
    };
    let mut all_equal = true;
    for n in 1..=depth - 2 {
        let deep = ranks(depth, n)?;
        let prev = ranks(depth - 1, n)?;
        if deep.0 < deep.1 {
            all_equal = false;
            if deep == prev {
                return Ok(GlobalVerdict::NotSurjective { stage: n });
            }
        }
    }
    Ok(if all_equal {
        GlobalVerdict::Surjective
    } else {
        GlobalVerdict::Inconclusive
    })
}

/// A few unbounded and periodic opens.
pub fn sample_tloc_opens() -> Vec<TlocOpen> {
    ["(-inf,+inf)", "(0,+inf)", "(-inf,-1/2)+(1,+inf)", "periodic((0,1/2);1)", "periodic((1/4,3/4)+(1,3/2);2)"]
        .iter()
        .map(|s| TlocOpen::parse(s).expect("valid sample"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalFlabby {
    pub per_open: Vec<(String, GlobalVerdict)>,
}

impl GlobalFlabby {
    /// `Some(true)` if every restriction is surjective, `Some(false)` if one
    /// provably is not, `None` otherwise.
    pub fn verdict(&self) -> Option<bool> {
        if self.per_open.iter().any(|(_, v)| matches!(v, GlobalVerdict::NotSurjective { .. })) {
            Some(false)
        } else if self.per_open.iter().all(|(_, v)| *v == GlobalVerdict::Surjective) {
            Some(true)
        } else {
            None
        }
    }
}

/// Global flabbiness tested on [`sample_tloc_opens`].
pub fn is_flabby_global<M: LocalModel + ?Sized>(model: &M, depth: usize) -> Result<GlobalFlabby> {
    is_flabby_global_on(model, depth, &sample_tloc_opens())
}

pub fn is_flabby_global_on<M: LocalModel + ?Sized>(model: &M, depth: usize, opens: &[TlocOpen]) -> Result<GlobalFlabby> {
    let per_open = opens
        .iter()
        .map(|u| Ok((tloc_label(u), global_restriction(model, u, depth)?)))
        .collect::<Result<_>>()?;
    Ok(GlobalFlabby { per_open })
}

fn tloc_label(u: &TlocOpen) -> String {
    match u {
        TlocOpen::Finite(s) => s.to_string(),
        TlocOpen::Periodic { pattern, period } => format!("periodic({pattern};{period})"),
    }
}

/// Bounded opens that are unions of at most two open intervals between
/// consecutive-or-not points of `pts`.
pub(crate) fn interval_unions(pts: &[Rat]) -> Vec<SemilinearOpen> {
    let mut ivs = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            ivs.push((i, j));
        }
    }
    let mut out: Vec<SemilinearOpen> = ivs
        .iter()
        .map(|&(i, j)| SemilinearOpen::open_q(pts[i].clone(), pts[j].clone()))
        .collect();
    for (a, &(i, j)) in ivs.iter().enumerate() {
        for &(k, l) in &ivs[a + 1..] {
            if j <= k {
                out.push(SemilinearOpen::open_q(pts[i].clone(), pts[j].clone()).union(&SemilinearOpen::open_q(
                    pts[k].clone(),
                    pts[l].clone(),
                )));
            }
        }
    }
    out
}

/// Sections over a closed set `K`: the colimit over open neighbourhoods,
/// realized as sections over the open star of `K` on a decomposition
/// subordinate to `K`.
fn closed_sections_restriction(
    f: &ConstructibleTSheaf,
    w: &SemilinearOpen,
    k: &SemilinearSet,
) -> Result<crate::exactla::Matrix> {
    let mut extra = w.endpoints();
    extra.extend(k.endpoints());
    let g = f.refine(&extra);
    // one more point inside every edge keeps the stars of separate pieces apart
    let g = g.refine(&interior_samples(g.complex(), 1));
    let c = g.complex();
    let wm = c.mask_of(w.as_set())?;
    let km = c.mask_of(k)?;
    let star = g.sheaf().poset().up_closure(&km);
    g.sheaf().restriction_between(&wm, &star)
}

/// c-softness on the line: `Γ(W;F) → Γ(V̄;F)` surjective for `V ⊂⊂ W`. `V`
/// runs over unions of at most two intervals between points of the
/// refinement by four interior samples per edge, enough for two disjoint
/// closed intervals inside one edge; `W` is a bounded interval
/// containing every endpoint and `V̄` with room to spare, which makes the
/// restriction hardest to hit.
pub fn is_c_soft(f: &ConstructibleTSheaf) -> Result<Verdict> {
    let fine = f.complex().refine(&interior_samples(f.complex(), 4)).0;
    let pts = fine.endpoints().to_vec();
    let w = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => SemilinearOpen::open_q(a - int(1), b + int(1)),
        _ => SemilinearOpen::interval(-1, 1),
    };
    // every closed set below has its endpoints among `pts`, so one
    // subordinate decomposition serves them all
    let mut extra = w.endpoints();
    extra.extend(pts.iter().cloned());
    let g = f.refine(&extra);
    let g = g.refine(&interior_samples(g.complex(), 1));
    let c = g.complex();
    let sw = g.sheaf().sections(&c.mask_of(w.as_set())?)?;
    for v in interval_unions(&pts) {
        let k = v.closure();
        let star = g.sheaf().poset().up_closure(&c.mask_of(&k)?);
        let r = g.sheaf().restriction(&sw, &g.sheaf().sections(&star)?)?;
        if r.rank() < r.rows() {
            return Ok(Verdict::from_witness(Some(RestrictionWitness {
                larger: w,
                smaller: k,
                larger_dim: r.cols(),
                smaller_dim: r.rows(),
                rank: r.rank(),
            })));
        }
    }
    Ok(Verdict::from_witness(None))
}

/// `Γ(W;F) → Γ(K;F)` for a closed bounded `K ⊂ W`.
pub fn closed_restriction_rank(f: &ConstructibleTSheaf, w: &SemilinearOpen, k: &SemilinearSet) -> Result<(usize, usize)> {
    let r = closed_sections_restriction(f, w, k)?;
    Ok((r.rank(), r.rows()))
}

/// Whether every edge stalk vanishes, which is what flabbiness and
/// c-softness come down to for constructible sheaves.
pub fn edge_stalks_vanish(f: &ConstructibleTSheaf) -> bool {
    (0..f.complex().len()).step_by(2).all(|i| f.sheaf().dim(i) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::Field;
    use crate::tsheaf::PeriodicSum;

    const Q: Field = Field::Rational;

    fn k(s: &str) -> ConstructibleTSheaf {
        ConstructibleTSheaf::constant(Q, &SemilinearSet::parse(s).unwrap())
    }

    fn o(s: &str) -> SemilinearOpen {
        SemilinearOpen::parse(s).unwrap()
    }

    #[test]
    fn constant_sheaf_is_not_flabby() {
        let kx = k("(-inf,+inf)");
        let v = is_flabby(&kx).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert!(w.rank < w.smaller_dim);
        // the pair from the documentation fails too
        let w = restriction_witness(&kx, &o("(0,3)"), &o("(0,1)+(2,3)")).unwrap().unwrap();
        assert_eq!((w.larger_dim, w.smaller_dim), (1, 2));
    }

    #[test]
    fn skyscrapers_and_zero_are_flabby() {
        assert!(is_flabby(&ConstructibleTSheaf::skyscraper(Q, int(1))).unwrap().holds);
        assert!(is_flabby(&ConstructibleTSheaf::zero(Q)).unwrap().holds);
        let two = ConstructibleTSheaf::skyscraper(Q, int(0)).direct_sum(&ConstructibleTSheaf::skyscraper(Q, int(2))).unwrap();
        assert!(is_flabby(&two).unwrap().holds);
    }

    #[test]
    fn closed_interval_is_not_flabby() {
        assert!(!is_flabby(&k("[1,2]")).unwrap().holds);
        assert!(!is_flabby(&k("(0,1)")).unwrap().holds);
    }

    #[test]
    fn c_softness() {
        let kx = k("(-inf,+inf)");
        let v = is_c_soft(&kx).unwrap();
        assert!(!v.holds);
        let (rank, rows) = closed_restriction_rank(&kx, &o("(-1,4)"), &SemilinearSet::parse("[0,1]+[2,3]").unwrap()).unwrap();
        assert_eq!((rank, rows), (1, 2));
        assert!(is_c_soft(&ConstructibleTSheaf::skyscraper(Q, int(1))).unwrap().holds);
        assert!(is_c_soft(&ConstructibleTSheaf::zero(Q)).unwrap().holds);
    }

    #[test]
    fn global_flabbiness() {
        let sky = ConstructibleTSheaf::skyscraper(Q, int(1));
        let per = TlocOpen::parse("periodic((0,1/2);1)").unwrap();
        assert_eq!(global_restriction(&sky, &per, 6).unwrap(), GlobalVerdict::Surjective);
        let kx = k("(-inf,+inf)");
        assert!(matches!(global_restriction(&kx, &per, 6).unwrap(), GlobalVerdict::NotSurjective { .. }));
        assert_eq!(is_flabby_global(&sky, 6).unwrap().verdict(), Some(true));
        assert_eq!(is_flabby_global(&kx, 6).unwrap().verdict(), Some(false));
        let ints = PeriodicSum::new(sky, int(1)).unwrap();
        assert_eq!(is_flabby_global(&ints, 6).unwrap().verdict(), Some(true));
    }

    #[test]
    fn criteria_match_edge_stalks_on_random_sheaves() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let f = ConstructibleTSheaf::random(&mut rng, Q, vec![int(0), int(1), int(3)], 1);
            let e = edge_stalks_vanish(&f);
            assert_eq!(is_flabby(&f).unwrap().holds, e, "{}", crate::tsheaf::write_line_sheaf(&f));
            assert_eq!(is_c_soft(&f).unwrap().holds, e);
        }
    }

    #[test]
    fn finite_local_criterion() {
        use crate::cellsheaf::FinitePoset;
        use std::sync::Arc;
        let p = Arc::new(FinitePoset::with_indices(2, &[(0, 1)]).unwrap());
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        assert!(is_flabby_finite(&k).unwrap().is_none());
        let disc = Arc::new(FinitePoset::with_indices(3, &[(0, 1), (0, 2)]).unwrap());
        let k = CellularSheaf::constant(Q, disc.clone(), &disc.full()).unwrap();
        assert!(is_flabby_finite(&k).unwrap().is_some());
    }
}
