use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;

use super::{cell_poset, ConstructibleTSheaf, TSheafMap};
use crate::error::{Error, Result};
use crate::exactla::{FinDiagram, Matrix};
use crate::lineorder::{int, CellComplex, Rat, SemilinearOpen};

type StageFn = dyn Fn(usize) -> ConstructibleTSheaf + Send + Sync;
type TransitionFn = dyn Fn(usize) -> TSheafMap + Send + Sync;
type CertificateFn = dyn Fn(&SemilinearOpen) -> usize + Send + Sync;

/// A sequence `F_1 → F_2 → …` of constructible sheaves standing for its
/// colimit, with a claimed stabilization index `n₀(U)` for each bounded `U`.
/// The claim is checked whenever sections are taken.
#[derive(Clone)]
pub struct IndSheaf {
    label: String,
    stage: Arc<StageFn>,
    transition: Arc<TransitionFn>,
    certificate: Arc<CertificateFn>,
}

impl fmt::Debug for IndSheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndSheaf({})", self.label)
    }
}

/// The colimit of the section spaces over one open.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndColimit {
    pub dim: usize,
    pub stable_from: usize,
    pub stage_dims: Vec<usize>,
}

impl IndSheaf {
    pub fn new(
        label: impl Into<String>,
        stage: impl Fn(usize) -> ConstructibleTSheaf + Send + Sync + 'static,
        transition: impl Fn(usize) -> TSheafMap + Send + Sync + 'static,
        certificate: impl Fn(&SemilinearOpen) -> usize + Send + Sync + 'static,
    ) -> Self {
        IndSheaf {
            label: label.into(),
            stage: Arc::new(stage),
            transition: Arc::new(transition),
            certificate: Arc::new(certificate),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Stage `n ≥ 1`.
    pub fn stage(&self, n: usize) -> ConstructibleTSheaf {
        (self.stage)(n)
    }

    /// The transition `F_n → F_{n+1}`.
    pub fn transition(&self, n: usize) -> TSheafMap {
        (self.transition)(n)
    }

    pub fn certificate(&self, u: &SemilinearOpen) -> usize {
        (self.certificate)(u).max(1)
    }

    /// The constant system on `F`.
    pub fn constant(f: ConstructibleTSheaf) -> Self {
        let g = f.clone();
        IndSheaf::new("constant", move |_| f.clone(), move |_| TSheafMap::identity(&g), |_| 1)
    }

    /// `lind k_{V_n}` along the inner exhaustion `V_n ⊂⊂ U`.
    pub fn exhaustion(field: crate::exactla::Field, u: SemilinearOpen) -> Self {
        let ends = u.endpoints();
        let u1 = u.clone();
        let u2 = u.clone();
        IndSheaf::new(
            format!("lind k_V, V cc {u}"),
            move |n| ConstructibleTSheaf::constant(field, u1.shrink(n as i64).as_set()),
            move |n| {
                let a = u2.shrink(n as i64);
                let b = u2.shrink(n as i64 + 1);
                TSheafMap::between_constants(field, a.as_set(), b.as_set()).expect("the exhaustion increases")
            },
            move |v| {
                let reach = ends.iter().chain(v.endpoints().iter()).map(|x| x.abs()).max().unwrap_or_else(|| int(0));
                let n_reach: BigInt = reach.ceil().to_integer() + 2;
                let gap = min_gap(&v.endpoints(), &ends);
                let n_gap: BigInt = gap.map_or(BigInt::from(1), |g| (int(1) / g).ceil().to_integer() + 1);
                usize::try_from(n_reach.max(n_gap)).unwrap_or(usize::MAX)
            },
        )
    }
}

/// Smallest positive distance between a point of `a` and a point of `b`.
fn min_gap(a: &[Rat], b: &[Rat]) -> Option<Rat> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (x - y).abs()))
        .filter(|d| *d > int(0))
        .min()
}

/// Cells of `fine` sent to the cells of `coarse` by the map that collapses
/// `[e − δ, e + δ]` onto each endpoint `e` of `coarse`.
fn collapse(fine: &CellComplex, coarse: &CellComplex, delta: &Rat) -> Vec<usize> {
    (0..fine.len())
        .map(|i| {
            let x = fine.sample(i);
            for (k, e) in coarse.endpoints().iter().enumerate() {
                let d = (&x - e).abs();
                let inside = if fine.is_vertex(i) { d <= *delta } else { d < *delta };
                if inside {
                    return 2 * k + 1;
                }
            }
            coarse.locate(&x)
        })
        .collect()
}

/// Stage `n` of the collapse construction on `e`: a refinement of `e` by the
/// points at distance `δ/n` from each endpoint, with each cell sent to the
/// cell of `e` it collapses onto. `δ` is a third of the smallest gap.
pub fn shriek_stage(e: &CellComplex, n: usize) -> (CellComplex, Vec<usize>) {
    let d = shriek_delta(e, n);
    let extra: Vec<Rat> = e.endpoints().iter().flat_map(|x| [x - &d, x + &d]).collect();
    let c = e.refine(&extra).0;
    let g = collapse(&c, e, &d);
    (c, g)
}

fn shriek_delta(e: &CellComplex, n: usize) -> Rat {
    let delta0 = e.endpoints().windows(2).map(|w| (&w[1] - &w[0]) / int(3)).min().unwrap_or_else(|| int(1));
    delta0 / int(n as i64)
}

fn pull_to_stage(f: &ConstructibleTSheaf, c: &CellComplex, g: &[usize]) -> ConstructibleTSheaf {
    let sheaf = f.sheaf().pullback(cell_poset(c), g).expect("collapsing is monotone");
    ConstructibleTSheaf::new(c.clone(), sheaf).expect("cells fit")
}

/// `ρ_!F` as an ind-system: stage `n` pulls `F` back along the map collapsing
/// a `δ/n`-neighbourhood of each endpoint onto it, so that sections over `U`
/// become sections over slight thickenings of the closure of `U`.
pub fn rho_shriek_system(f: &ConstructibleTSheaf) -> IndSheaf {
    let e = f.complex().clone();
    let pts = e.endpoints().to_vec();
    let stage = {
        let f = f.clone();
        let e = e.clone();
        move |n: usize| {
            let (c, g) = shriek_stage(&e, n);
            pull_to_stage(&f, &c, &g)
        }
    };
    let transition = {
        let f = f.clone();
        let e = e.clone();
        move |n: usize| {
            let fine = shriek_stage(&e, n).0.common_refinement(&shriek_stage(&e, n + 1).0);
            let ga = collapse(&fine, &e, &shriek_delta(&e, n));
            let gb = collapse(&fine, &e, &shriek_delta(&e, n + 1));
            let a = pull_to_stage(&f, &fine, &ga);
            let b = pull_to_stage(&f, &fine, &gb);
            let comps: Vec<Matrix> = ga.iter().zip(&gb).map(|(&x, &y)| f.sheaf().map(x, y)).collect();
            TSheafMap::new(&a, &b, comps).expect("the collapse maps are nested")
        }
    };
    let delta1 = shriek_delta(&e, 1);
    let certificate = move |v: &SemilinearOpen| {
        let gap = min_gap(&v.endpoints(), &pts);
        match gap {
            // need δ/n below the gap
            Some(g) => usize::try_from((&delta1 / g).floor().to_integer() + BigInt::from(2)).unwrap_or(usize::MAX),
            None => 1,
        }
    };
    IndSheaf::new("rho_! F", stage, transition, certificate)
}

/// Stage `n` of `ρ_!φ` for a map on one decomposition: `φ` pulled back along
/// the same collapse as [`rho_shriek_system`] uses for its source and target.
pub fn rho_shriek_map_stage(phi: &TSheafMap, n: usize) -> Result<TSheafMap> {
    let (c, g) = shriek_stage(phi.complex(), n);
    let a = pull_to_stage(&phi.source, &c, &g);
    let b = pull_to_stage(&phi.target, &c, &g);
    TSheafMap::new(&a, &b, g.iter().map(|&x| phi.map.comps[x].clone()).collect())
}

/// `lind Γ(U; F_n)`, checked against the certificate: the transitions on
/// sections must be isomorphisms at `n₀(U)` and `n₀(U) + 1`.
pub fn ind_colimit_sections(s: &IndSheaf, u: &SemilinearOpen) -> Result<IndColimit> {
    if !u.is_t_open() {
        return Err(Error::NotRepresentable(format!("{u} is unbounded")));
    }
    let n0 = s.certificate(u);
    let last = n0 + 2;
    let stages: Vec<ConstructibleTSheaf> = (1..=last).map(|n| s.stage(n)).collect();
    let dims: Vec<usize> = stages.iter().map(|f| f.section_dim(u)).collect::<Result<_>>()?;
    let field = stages[0].field();
    let mut d = FinDiagram::new(field, dims.clone());
    for n in 1..last {
        let m = s.transition(n).on_sections(u)?;
        if n >= n0 && !(m.rows() == m.cols() && m.rank() == m.rows()) {
            return Err(Error::Certificate(format!(
                "{}: sections over {u} still change from stage {n} to {} (claimed stable from {n0})",
                s.label,
                n + 1
            )));
        }
        d.add_arrow(n - 1, n, m)?;
    }
    let colim = d.colimit()?;
    let inj = &colim.injections[n0 - 1];
    if !(inj.rows() == inj.cols() && inj.rank() == inj.rows()) {
        return Err(Error::Certificate(format!("stage {n0} does not map isomorphically to the colimit")));
    }
    Ok(IndColimit {
        dim: colim.dim,
        stable_from: n0,
        stage_dims: dims,
    })
}

/// `ρ_!k_U` by the exhaustion formula, for comparison with [`rho_shriek_system`].
pub fn rho_shriek_constant(field: crate::exactla::Field, u: &SemilinearOpen) -> IndSheaf {
    IndSheaf::exhaustion(field, u.clone())
}

/// Sections over the closure, `Γ(Ū; F)`: the value of the presheaf whose
/// sheafification is `ρ_!F`, before sheafifying.
pub fn closure_sections_dim(f: &ConstructibleTSheaf, u: &SemilinearOpen) -> Result<usize> {
    let cl = u.closure();
    let c = f.complex().refine(&cl.endpoints()).0;
    let g = f.refine_to(&c)?;
    let mask = c.mask_of(&cl)?;
    let star = g.sheaf().poset().up_closure(&mask);
    g.sheaf().section_dim(&star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::Field;
    use crate::lineorder::{rat, SemilinearSet};

    const Q: Field = Field::Rational;

    fn o(s: &str) -> SemilinearOpen {
        SemilinearOpen::parse(s).unwrap()
    }

    #[test]
    fn shrinking_left_end() {
        let s = IndSheaf::new(
            "k_(1/(n+1),1)",
            |n| ConstructibleTSheaf::constant(Q, &SemilinearSet::open_q(rat(1, n as i64 + 1), int(1))),
            |n| {
                TSheafMap::between_constants(
                    Q,
                    &SemilinearSet::open_q(rat(1, n as i64 + 1), int(1)),
                    &SemilinearSet::open_q(rat(1, n as i64 + 2), int(1)),
                )
                .unwrap()
            },
            |_| 1,
        );
        let c = ind_colimit_sections(&s, &o("(1/2,1)")).unwrap();
        assert_eq!(c.dim, 1);
        assert_eq!(c.stable_from, 1);
    }

    #[test]
    fn growing_sums_violate_any_certificate() {
        let s = IndSheaf::new(
            "sum^n k_(0,1)",
            |n| {
                let k = ConstructibleTSheaf::constant(Q, &SemilinearSet::open_q(int(0), int(1)));
                (1..n).fold(k.clone(), |a, _| a.direct_sum(&k).unwrap())
            },
            |n| {
                let k = ConstructibleTSheaf::constant(Q, &SemilinearSet::open_q(int(0), int(1)));
                let a = (1..n).fold(k.clone(), |a, _| a.direct_sum(&k).unwrap());
                let b = a.direct_sum(&k).unwrap();
                let comps = (0..a.complex().len())
                    .map(|i| Matrix::identity(Q, b.sheaf().dim(i)).select_cols(&(0..a.sheaf().dim(i)).collect::<Vec<_>>()))
                    .collect();
                TSheafMap::new(&a, &b, comps).unwrap()
            },
            |_| 3,
        );
        assert!(matches!(ind_colimit_sections(&s, &o("(0,1)")), Err(Error::Certificate(_))));
    }

    #[test]
    fn shriek_of_constant_on_interval() {
        let u = o("(0,1)");
        let f = ConstructibleTSheaf::constant(Q, u.as_set());
        let sys = rho_shriek_system(&f);
        let ex = rho_shriek_constant(Q, &u);
        for v in ["(0,1)", "(1/4,3/4)", "(-1,2)", "(0,1/2)+(1/2,1)", "(-1/2,1/4)"] {
            let a = ind_colimit_sections(&sys, &o(v)).unwrap().dim;
            let b = ind_colimit_sections(&ex, &o(v)).unwrap().dim;
            assert_eq!(a, b, "on {v}");
        }
        // a section of k_V over (−1,2) vanishes near the ends of V
        assert_eq!(ind_colimit_sections(&sys, &o("(-1,2)")).unwrap().dim, 0);
        assert_eq!(ind_colimit_sections(&sys, &o("(1/4,3/4)")).unwrap().dim, 1);
    }

    #[test]
    fn shriek_of_closed_interval_sees_outside_germs() {
        let f = ConstructibleTSheaf::constant(Q, &SemilinearSet::parse("[0,1]").unwrap());
        let sys = rho_shriek_system(&f);
        assert_eq!(ind_colimit_sections(&sys, &o("(-1,0)")).unwrap().dim, 1);
        assert_eq!(closure_sections_dim(&f, &o("(-1,0)")).unwrap(), 1);
        assert_eq!(f.section_dim(&o("(-1,0)")).unwrap(), 0);
    }

    #[test]
    fn sheafified_versus_closure_values() {
        let k = ConstructibleTSheaf::constant(Q, &SemilinearSet::line());
        let u = o("(0,1)+(1,2)");
        assert_eq!(ind_colimit_sections(&rho_shriek_system(&k), &u).unwrap().dim, 2);
        assert_eq!(closure_sections_dim(&k, &u).unwrap(), 1);
    }
}
