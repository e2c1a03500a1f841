//! The functors between sheaves on the line and sheaves on its site of
//! bounded semilinear opens, and pushforward along maps of sites.
//!
//! A constructible sheaf on the line and its restriction to the site share
//! one cellular representation; what differs is which opens they may be
//! evaluated on and how.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::cellsheaf::{ext_dim, hom_pre, hom_space, CellularSheaf, FinitePoset, HomSpace, Mask, Presheaf, SheafMap};
use crate::error::{Error, Result};
use crate::exactla::{Field, Matrix};
use crate::homalg::ShortExact;
use crate::lineorder::{int, rat, CellComplex, Endpoint, Rat, SemilinearOpen, SemilinearSet};
use crate::tsheaf::{
    cell_poset, ind_colimit_sections, rho_shriek_map_stage, rho_shriek_system, shriek_stage, ConstructibleTSheaf, IndSheaf,
    TSheafMap,
};

/// A constructible sheaf on the line itself. It may be evaluated on any
/// finite union of open intervals, bounded or not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XSheaf {
    data: ConstructibleTSheaf,
}

impl XSheaf {
    pub fn new(data: ConstructibleTSheaf) -> Self {
        XSheaf { data }
    }

    pub fn constant(field: Field, z: &SemilinearSet) -> Self {
        XSheaf::new(ConstructibleTSheaf::constant(field, z))
    }

    pub fn data(&self) -> &ConstructibleTSheaf {
        &self.data
    }

    pub fn section_dim(&self, u: &SemilinearOpen) -> Result<usize> {
        self.data.section_dim(u)
    }
}

/// Restriction to the site: the cellular data is kept as is.
pub fn rho_star(f: &XSheaf) -> ConstructibleTSheaf {
    f.data.clone()
}

/// For a constructible sheaf on the site. Its sections over arbitrary opens
/// are given by [`limit_sections`].
pub fn rho_inv(g: &ConstructibleTSheaf) -> XSheaf {
    XSheaf::new(g.clone())
}

fn min_positive_gap(pts: &[Rat]) -> Option<Rat> {
    let mut s = pts.to_vec();
    s.sort();
    s.dedup();
    s.windows(2).map(|w| &w[1] - &w[0]).min()
}

/// From which `n` the chain `U.shrink(n)` has reached every feature of `U`
/// relative to `ends`.
fn shrink_certificate(u: &SemilinearOpen, ends: &[Rat]) -> usize {
    let mut pts = u.endpoints();
    pts.extend(ends.iter().cloned());
    let reach: BigInt = pts.iter().map(|x| x.abs()).max().unwrap_or_else(|| int(0)).ceil().to_integer() + 2;
    let gap: BigInt = min_positive_gap(&pts).map_or(BigInt::from(1), |g| (int(2) / g).ceil().to_integer() + 1);
    usize::try_from(reach.max(gap)).unwrap_or(usize::MAX)
}

fn is_iso(m: &Matrix) -> bool {
    m.rows() == m.cols() && m.rank() == m.rows()
}

/// `lim Γ(V; G)` over the bounded `V` with `V̄ ⊂ U`, along the cofinal
/// chain `U.shrink(n)`. The restrictions must be isomorphisms from the
/// certified index on.
pub fn limit_sections(g: &ConstructibleTSheaf, u: &SemilinearOpen) -> Result<usize> {
    let n0 = shrink_certificate(u, g.endpoints());
    for n in n0..n0 + 2 {
        let r = g.restriction(&u.shrink(n as i64 + 1), &u.shrink(n as i64))?;
        if !is_iso(&r) {
            return Err(Error::Certificate(format!("sections over {} still change at {n}", u)));
        }
    }
    g.section_dim(&u.shrink(n0 as i64))
}

/// Small opens around each cell of `c`: an interval around each vertex
/// reaching two thirds of the way to its neighbours, and a short interval in
/// the middle of each edge, inside the neighbourhoods of its vertices.
fn cell_neighbourhoods(c: &CellComplex) -> Vec<SemilinearOpen> {
    let pts = c.endpoints();
    let m = pts.len();
    if m == 0 {
        return vec![SemilinearOpen::interval(0, 1)];
    }
    let mut out = Vec::with_capacity(c.len());
    out.push(SemilinearOpen::open_q(&pts[0] - rat(1, 2), &pts[0] - rat(1, 4)));
    for k in 0..m {
        let left = if k > 0 { (&pts[k] - &pts[k - 1]) * rat(2, 3) } else { int(1) };
        let right = if k + 1 < m { (&pts[k + 1] - &pts[k]) * rat(2, 3) } else { int(1) };
        out.push(SemilinearOpen::open_q(&pts[k] - left, &pts[k] + right));
        if k + 1 < m {
            let g = &pts[k + 1] - &pts[k];
            out.push(SemilinearOpen::open_q(&pts[k] + &g * rat(2, 5), &pts[k] + &g * rat(3, 5)));
        }
    }
    out.push(SemilinearOpen::open_q(&pts[m - 1] + rat(1, 4), &pts[m - 1] + rat(1, 2)));
    out
}

/// `ρ⁻¹` of the colimit of an ind-system, read on the decomposition `c`
/// with respect to which the colimit is expected to be constructible. The
/// stalk at a cell is the certified colimit of sections over a small open
/// around it, and generization is restriction at a common stable stage.
pub fn rho_inv_ind(s: &IndSheaf, c: &CellComplex) -> Result<XSheaf> {
    let nbhd = cell_neighbourhoods(c);
    let mut stage = 1;
    let mut dims = Vec::with_capacity(nbhd.len());
    for j in &nbhd {
        let col = ind_colimit_sections(s, j)?;
        stage = stage.max(col.stable_from);
        dims.push(col.dim);
    }
    let g = s.stage(stage);
    let poset = cell_poset(c);
    let mut maps = Vec::new();
    for &(a, b) in poset.hasse() {
        maps.push(g.restriction(&nbhd[a], &nbhd[b])?);
    }
    for (i, j) in nbhd.iter().enumerate() {
        if g.section_dim(j)? != dims[i] {
            return Err(Error::Certificate(format!("stage {stage} is not stable over {j}")));
        }
    }
    let sheaf = CellularSheaf::new(s.stage(1).field(), poset, dims, maps)?;
    Ok(XSheaf::new(ConstructibleTSheaf::new(c.clone(), sheaf)?))
}

/// `Γ(U; ρ⁻¹ lind F_n) = lim_V lind_n Γ(V; F_n)` over `V = U.shrink(m)`,
/// with the colimits certified and the restrictions taken at a common
/// stable stage. `ends` are the endpoints the colimit is constructible for.
pub fn ind_limit_sections(s: &IndSheaf, u: &SemilinearOpen, ends: &[Rat]) -> Result<usize> {
    let m0 = shrink_certificate(u, ends);
    let chain: Vec<SemilinearOpen> = (m0..m0 + 3).map(|m| u.shrink(m as i64)).collect();
    let cols = chain.iter().map(|v| ind_colimit_sections(s, v)).collect::<Result<Vec<_>>>()?;
    let stage = cols.iter().map(|c| c.stable_from).max().unwrap_or(1);
    let g = s.stage(stage);
    for k in 0..2 {
        let r = g.restriction(&chain[k + 1], &chain[k])?;
        if !is_iso(&r) || r.rows() != cols[k].dim {
            return Err(Error::Certificate(format!("limit over shrinkings of {u} not reached at {}", m0 + k)));
        }
    }
    Ok(cols[0].dim)
}

pub fn rho_shriek(f: &XSheaf) -> IndSheaf {
    rho_shriek_system(&f.data)
}

/// Outcome of [`adjunction_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjunctionReport {
    /// `Hom(ρ_!F, G)`, read at the stage where the inverse limit has settled.
    pub hom_shriek: usize,
    /// `Hom(F, ρ⁻¹G)`.
    pub hom_inv: usize,
    pub stage: usize,
    /// Precomposition with the transitions is bijective on the stages examined.
    pub limit_stable: bool,
    /// `ξ∘θ` and `θ∘ξ` are identities.
    pub mutually_inverse: bool,
    /// `θ(ψ)` is compatible with the transitions.
    pub compatible: bool,
    /// `ρ⁻¹ρ_!F ≅ F`.
    pub unit_iso: bool,
}

impl AdjunctionReport {
    pub fn passed(&self) -> bool {
        self.hom_shriek == self.hom_inv && self.limit_stable && self.mutually_inverse && self.compatible && self.unit_iso
    }
}

/// A point well inside each cell, away from every collapse zone.
fn deep_points(e: &CellComplex) -> Vec<Rat> {
    let pts = e.endpoints();
    (0..e.len())
        .map(|i| {
            if e.is_vertex(i) {
                pts[i / 2].clone()
            } else if pts.is_empty() {
                int(0)
            } else if i == 0 {
                &pts[0] - int(1)
            } else if i == e.len() - 1 {
                &pts[pts.len() - 1] + int(1)
            } else {
                (&pts[i / 2 - 1] + &pts[i / 2]) / int(2)
            }
        })
        .collect()
}

struct Adjunction {
    f: ConstructibleTSheaf,
    g: ConstructibleTSheaf,
    system: IndSheaf,
}

impl Adjunction {
    fn new(f: &XSheaf, g: &ConstructibleTSheaf) -> Result<Self> {
        let (f, g) = f.data.align(g)?;
        let system = rho_shriek_system(&f);
        Ok(Adjunction { f, g, system })
    }

    fn e(&self) -> &CellComplex {
        self.f.complex()
    }

    /// `G` on the decomposition of stage `n`.
    fn g_at(&self, c: &CellComplex) -> Result<ConstructibleTSheaf> {
        self.g.refine_to(c)
    }

    /// `θ(ψ)` at stage `n`: on a cell collapsing to `c`, `F_c → G_c` followed
    /// by generization of `G` to the cell itself.
    fn theta(&self, psi: &SheafMap, n: usize) -> Result<TSheafMap> {
        let (c, col) = shriek_stage(self.e(), n);
        let home = c.map_to(self.e())?;
        let comps = (0..c.len())
            .map(|d| self.g.sheaf().map(col[d], home[d]).mul(&psi.comps[col[d]]))
            .collect();
        TSheafMap::new(&self.system.stage(n), &self.g_at(&c)?, comps)
    }

    /// `ξ(φ)`: read a stage map at a point deep inside each cell.
    fn xi(&self, phi: &TSheafMap) -> Result<SheafMap> {
        let c = phi.complex();
        let comps = deep_points(self.e()).iter().map(|x| phi.map.comps[c.locate(x)].clone()).collect();
        SheafMap::new(self.f.sheaf().clone(), self.g.sheaf().clone(), comps)
    }

    fn stage_hom(&self, n: usize) -> Result<(HomSpace, ConstructibleTSheaf, ConstructibleTSheaf)> {
        let fs = self.system.stage(n);
        let gs = self.g_at(fs.complex())?;
        Ok((hom_space(fs.sheaf(), gs.sheaf())?, fs, gs))
    }
}

/// `Hom(ρ_!F, G) ≅ Hom(F, ρ⁻¹G)` with both directions built explicitly, and
/// `ρ⁻¹ρ_!F ≅ F`.
pub fn adjunction_check(f: &XSheaf, g: &ConstructibleTSheaf) -> Result<AdjunctionReport> {
    let adj = Adjunction::new(f, g)?;
    let stage = 2;
    let field = adj.f.field();
    let h_inv = hom_space(adj.f.sheaf(), adj.g.sheaf())?;
    let (h_n, fs, gs) = adj.stage_hom(stage)?;

    let mut limit_stable = true;
    for n in 1..=3 {
        let t = adj.system.transition(n);
        let c = t.complex().clone();
        let gc = adj.g.refine_to(&c)?;
        let later = hom_space(t.target.sheaf(), gc.sheaf())?;
        let earlier = hom_space(t.source.sheaf(), gc.sheaf())?;
        limit_stable &= is_iso(&hom_pre(&later, &earlier, &t.map)?);
    }

    let mut theta_cols = Vec::new();
    let mut compatible = true;
    for i in 0..h_inv.dim() {
        let psi = h_inv.element(i);
        let th = adj.theta(&psi, stage)?;
        theta_cols.push(h_n.coords(&SheafMap::new(fs.sheaf().clone(), gs.sheaf().clone(), th.map.comps.clone())?)?);
        let next = adj.theta(&psi, stage + 1)?;
        let via = next.after(&adj.system.transition(stage))?;
        let direct = th.refine_to(via.complex())?;
        compatible &= via.map.comps == direct.map.comps;
    }
    let theta = Matrix::hstack(field, h_n.dim(), &theta_cols);
    let mut xi_cols = Vec::new();
    for i in 0..h_n.dim() {
        let phi = TSheafMap::new(&fs, &gs, h_n.element(i).comps)?;
        xi_cols.push(h_inv.coords(&adj.xi(&phi)?)?);
    }
    let xi = Matrix::hstack(field, h_inv.dim(), &xi_cols);
    let mutually_inverse = h_n.dim() == h_inv.dim()
        && xi.mul(&theta).is_identity()
        && theta.mul(&xi).is_identity();
    let unit_iso = rho_inv_ind(&adj.system, adj.e())?.data.is_isomorphic(&adj.f)?;
    Ok(AdjunctionReport {
        hom_shriek: h_n.dim(),
        hom_inv: h_inv.dim(),
        stage,
        limit_stable,
        mutually_inverse,
        compatible,
        unit_iso,
    })
}

/// Stagewise exactness of `ρ_!` on a short exact sequence.
pub fn shriek_exact(ses: &ShortExact, stages: usize) -> Result<bool> {
    for n in 1..=stages {
        let s = ShortExact {
            first: rho_shriek_map_stage(&ses.first, n)?,
            second: rho_shriek_map_stage(&ses.second, n)?,
        };
        if !s.is_exact() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The stagewise tensor product of two ind-systems.
pub fn tensor_system(a: &IndSheaf, b: &IndSheaf) -> IndSheaf {
    let (a1, b1) = (a.clone(), b.clone());
    let (a2, b2) = (a.clone(), b.clone());
    let (a3, b3) = (a.clone(), b.clone());
    IndSheaf::new(
        format!("{} ⊗ {}", a.label(), b.label()),
        move |n| a1.stage(n).tensor(&b1.stage(n)).expect("same field"),
        move |n| {
            let (s, t) = (a2.transition(n), b2.transition(n));
            let c = s.complex().common_refinement(t.complex());
            let (s, t) = (s.refine_to(&c).expect("finer"), t.refine_to(&c).expect("finer"));
            let comps = s.map.comps.iter().zip(&t.map.comps).map(|(x, y)| x.kron(y)).collect();
            TSheafMap::new(&s.source.tensor(&t.source).expect("same field"), &s.target.tensor(&t.target).expect("same field"), comps)
                .expect("tensor of natural maps")
        },
        move |u| a3.certificate(u).max(b3.certificate(u)),
    )
}

/// `ρ_!(F ⊗ G)` against `ρ_!F ⊗ ρ_!G`: stagewise isomorphic, with equal
/// section colimits over `opens`.
pub fn shriek_tensor_check(f: &XSheaf, g: &XSheaf, opens: &[SemilinearOpen]) -> Result<bool> {
    let (fa, ga) = f.data.align(&g.data)?;
    let whole = rho_shriek_system(&fa.tensor(&ga)?);
    let parts = tensor_system(&rho_shriek_system(&fa), &rho_shriek_system(&ga));
    for n in 1..=3 {
        if !whole.stage(n).is_isomorphic(&parts.stage(n))? {
            return Ok(false);
        }
    }
    for u in opens {
        if ind_colimit_sections(&whole, u)?.dim != ind_colimit_sections(&parts, u)?.dim {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `k_U` on the site as the sheafification of `V ↦ k` for `V ⊆ U` and `0`
/// otherwise, computed on the opens inside a window around `U` that are
/// unions of cells. Returned as a sheaf on the cells of the window.
pub fn site_constant_by_sheafification(field: Field, u: &SemilinearOpen) -> Result<(CellularSheaf, Mask)> {
    let ends = u.endpoints();
    let (lo, hi) = match (ends.first(), ends.last()) {
        (Some(a), Some(b)) => (a - int(1), b + int(1)),
        _ => (int(-1), int(1)),
    };
    let mut pts = ends.clone();
    pts.extend([lo.clone(), hi.clone()]);
    let c = CellComplex::new(pts);
    let window = c.mask_of(&SemilinearSet::open_q(lo, hi))?;
    let (poset, idx) = cell_poset(&c).induced(&window);
    let poset = Arc::new(poset);
    let inside = |m: &Mask| -> bool {
        let cells: Vec<usize> = (0..m.len()).filter(|&i| m[i]).map(|i| idx[i]).collect();
        let set = c.set_of(&c.mask_from_indices(&cells));
        set.is_subset(u.as_set())
    };
    let pre = Presheaf::from_fn(
        field,
        poset,
        |m| usize::from(inside(m)),
        |_, _, a, b| if a == 1 && b == 1 { Matrix::identity(field, 1) } else { Matrix::zeros(field, b, a) },
    )?;
    Ok((pre.sheafify()?.to_cellular()?, window))
}

/// Whether two sheaves on the same poset are isomorphic, by random
/// combinations of a hom basis.
pub fn cellular_isomorphic(a: &CellularSheaf, b: &CellularSheaf) -> Result<bool> {
    if a.dims() != b.dims() {
        return Ok(false);
    }
    let h = hom_space(a, b)?;
    let field = a.field();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(17);
    for _ in 0..16 {
        let c = Matrix::from_fn(field, h.dim(), 1, |_, _| field.int(rand::Rng::gen_range(&mut rng, -1000..=1000)));
        if h.combination(&c).is_iso() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The two descriptions of the constant sheaf on `U` agree on the window.
pub fn site_constant_matches(field: Field, u: &SemilinearOpen) -> Result<bool> {
    let (sheafified, window) = site_constant_by_sheafification(field, u)?;
    let ends = u.endpoints();
    let (lo, hi) = match (ends.first(), ends.last()) {
        (Some(a), Some(b)) => (a - int(1), b + int(1)),
        _ => (int(-1), int(1)),
    };
    let mut pts = ends;
    pts.extend([lo, hi]);
    let c = CellComplex::new(pts);
    let direct = rho_star(&XSheaf::constant(field, u.as_set())).refine_to(&c)?;
    let (restricted, _) = direct.sheaf().restrict(&window);
    let restricted = restricted.rebase(sheafified.poset().clone())?;
    cellular_isomorphic(&sheafified, &restricted)
}

/// A continuous, strictly monotone, piecewise-affine map of the line with
/// rational breakpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseAffine {
    knots: Vec<(Rat, Rat)>,
    left_slope: Rat,
    right_slope: Rat,
}

impl PiecewiseAffine {
    /// Knots `(x_i, f(x_i))` with increasing `x_i`, and the slopes of the two
    /// unbounded pieces.
    pub fn new(knots: Vec<(Rat, Rat)>, left_slope: Rat, right_slope: Rat) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidSiteMap("at least one knot is needed".into()));
        }
        let mut slopes = vec![left_slope.clone()];
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidSiteMap("knots must increase".into()));
            }
            slopes.push((&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0));
        }
        slopes.push(right_slope.clone());
        let positive = slopes[0].is_positive();
        if slopes.iter().any(|s| s.is_zero() || s.is_positive() != positive) {
            return Err(Error::InvalidSiteMap("slopes must be nonzero and of one sign".into()));
        }
        Ok(PiecewiseAffine {
            knots,
            left_slope,
            right_slope,
        })
    }

    pub fn affine(slope: Rat, offset: Rat) -> Result<Self> {
        PiecewiseAffine::new(vec![(int(0), offset)], slope.clone(), slope)
    }

    /// `"x0:y0 x1:y1 ... ; left ; right"` or `"slope,offset"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad map {s:?}"));
        let num = |t: &str| t.trim().parse::<Rat>().map_err(|_| bad());
        if let Some((a, b)) = s.split_once(',') {
            if !s.contains(';') {
                return PiecewiseAffine::affine(num(a)?, num(b)?);
            }
        }
        let parts: Vec<&str> = s.split(';').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let knots = parts[0]
            .split_whitespace()
            .map(|k| {
                let (x, y) = k.split_once(':').ok_or_else(bad)?;
                Ok((num(x)?, num(y)?))
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseAffine::new(knots, num(parts[1])?, num(parts[2])?)
    }

    pub fn increasing(&self) -> bool {
        self.left_slope.is_positive()
    }

    pub fn breakpoints(&self) -> Vec<Rat> {
        self.knots.iter().map(|k| k.0.clone()).collect()
    }

    pub fn apply(&self, x: &Rat) -> Rat {
        let k = &self.knots;
        if x <= &k[0].0 {
            return &k[0].1 + &self.left_slope * (x - &k[0].0);
        }
        for w in k.windows(2) {
            if x <= &w[1].0 {
                return &w[0].1 + (&w[1].1 - &w[0].1) * (x - &w[0].0) / (&w[1].0 - &w[0].0);
            }
        }
        let last = &k[k.len() - 1];
        &last.1 + &self.right_slope * (x - &last.0)
    }

    pub fn invert(&self, y: &Rat) -> Rat {
        let flipped: Vec<(Rat, Rat)> = self.knots.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        let inv = if self.increasing() {
            PiecewiseAffine {
                knots: flipped,
                left_slope: int(1) / &self.left_slope,
                right_slope: int(1) / &self.right_slope,
            }
        } else {
            PiecewiseAffine {
                knots: flipped.into_iter().rev().collect(),
                left_slope: int(1) / &self.right_slope,
                right_slope: int(1) / &self.left_slope,
            }
        };
        inv.apply(y)
    }
}

/// A map of sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SiteMap {
    Identity,
    Line(PiecewiseAffine),
    /// The inclusion of an open subset.
    Inclusion(SemilinearOpen),
    /// The constant map to a point. The preimage of the point is the whole
    /// line, which lies in the locally bounded family but not in the bounded one.
    ToPoint,
    /// A monotone map of finite posets.
    Poset { target: Arc<FinitePoset>, map: Vec<usize> },
}

fn end_image(h: &PiecewiseAffine, e: &Endpoint, inverse: bool) -> Endpoint {
    let f = |x: &Rat| if inverse { h.invert(x) } else { h.apply(x) };
    let flip = !h.increasing();
    match e {
        Endpoint::Finite(x) => Endpoint::Finite(f(x)),
        Endpoint::NegInf if flip => Endpoint::PosInf,
        Endpoint::PosInf if flip => Endpoint::NegInf,
        other => other.clone(),
    }
}

impl SiteMap {
    /// `f⁻¹(V)`, which must be bounded when `V` is.
    pub fn preimage(&self, v: &SemilinearOpen) -> Result<SemilinearOpen> {
        match self {
            SiteMap::Identity => Ok(v.clone()),
            SiteMap::Line(h) => {
                let mut out = SemilinearOpen::empty();
                for (a, b) in v.intervals() {
                    let (x, y) = (end_image(h, &a, true), end_image(h, &b, true));
                    let piece = if h.increasing() { SemilinearOpen::open(x, y) } else { SemilinearOpen::open(y, x) };
                    out = out.union(&piece);
                }
                Ok(out)
            }
            SiteMap::Inclusion(u) => Ok(v.intersect(u)),
            SiteMap::ToPoint => Err(Error::InvalidSiteMap(
                "the preimage of the point is the whole line, which is not bounded".into(),
            )),
            SiteMap::Poset { .. } => Err(Error::InvalidSiteMap("a poset map acts on finite sheaves".into())),
        }
    }

    /// Checks that bounded opens pull back to bounded opens on a few samples;
    /// for maps of the line this holds exactly when the map is proper, which
    /// piecewise-affine maps with nonzero end slopes are.
    pub fn validate(&self) -> Result<()> {
        match self {
            SiteMap::Poset { target, map } => {
                let _ = (target, map);
                Ok(())
            }
            _ => {
                for v in ["(0,1)", "(-3,-2)+(5/2,7)"] {
                    let pre = self.preimage(&SemilinearOpen::parse(v)?)?;
                    if !pre.is_t_open() {
                        return Err(Error::InvalidSiteMap(format!("preimage of {v} is {pre}")));
                    }
                }
                Ok(())
            }
        }
    }
}

/// `f_*F` with `Γ(V; f_*F) = Γ(f⁻¹V; F)`.
pub fn pushforward(f: &SiteMap, sheaf: &ConstructibleTSheaf) -> Result<ConstructibleTSheaf> {
    f.validate()?;
    match f {
        SiteMap::Identity => Ok(sheaf.clone()),
        SiteMap::Line(h) => {
            let c = sheaf.complex();
            let image = CellComplex::new(c.endpoints().iter().map(|x| h.apply(x)).collect());
            let n = c.len();
            let g: Vec<usize> = (0..n).map(|i| if h.increasing() { i } else { n - 1 - i }).collect();
            let pushed = sheaf.sheaf().pushforward(cell_poset(&image), &g)?;
            let out = ConstructibleTSheaf::new(image, pushed)?;
            let knots: Vec<Rat> = h.breakpoints().iter().map(|x| h.apply(x)).collect();
            Ok(out.refine(&knots))
        }
        SiteMap::Inclusion(u) => {
            let g = sheaf.refine(&u.endpoints());
            let mask = g.complex().mask_of(u.as_set())?;
            let (part, idx) = g.sheaf().restrict(&mask);
            let pushed = part.pushforward(g.sheaf().poset().clone(), &idx)?;
            ConstructibleTSheaf::new(g.complex().clone(), pushed)
        }
        SiteMap::ToPoint | SiteMap::Poset { .. } => {
            f.preimage(&SemilinearOpen::interval(0, 1))?;
            unreachable!("preimage fails for these maps")
        }
    }
}

/// The constant map to a point on the locally bounded family: `f_*F` is the
/// space of global sections.
pub fn pushforward_to_point(sheaf: &ConstructibleTSheaf) -> Result<usize> {
    sheaf.section_dim(&SemilinearOpen::line())
}

/// `Γ(V; f_*F) = Γ(f⁻¹V; F)` on every sample.
pub fn section_contract(f: &SiteMap, sheaf: &ConstructibleTSheaf, samples: &[SemilinearOpen]) -> Result<bool> {
    let pushed = pushforward(f, sheaf)?;
    for v in samples {
        if pushed.section_dim(v)? != sheaf.section_dim(&f.preimage(v)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `f_*F` for a monotone map of finite posets.
pub fn pushforward_finite(target: &Arc<FinitePoset>, map: &[usize], sheaf: &CellularSheaf) -> Result<CellularSheaf> {
    sheaf.pushforward(target.clone(), map)
}

/// Stalks of `R¹f_*F` for a monotone map of finite posets: at `q` it is
/// `H¹(f⁻¹(↑q); F) = Ext¹(k_{f⁻¹(↑q)}, F)`.
pub fn first_derived_pushforward(target: &Arc<FinitePoset>, map: &[usize], sheaf: &CellularSheaf) -> Result<Vec<usize>> {
    (0..target.len())
        .map(|q| {
            let pre: Mask = map.iter().map(|&x| target.leq(q, x)).collect();
            let k = CellularSheaf::constant(sheaf.field(), sheaf.poset().clone(), &pre)?;
            ext_dim(&k, sheaf, 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homalg::{is_c_soft, is_flabby, random_flabby, random_ses};
    use crate::tsheaf::rho_shriek_constant;
    use rand::SeedableRng;

    const Q: Field = Field::Rational;

    fn o(s: &str) -> SemilinearOpen {
        SemilinearOpen::parse(s).unwrap()
    }

    fn x(s: &str) -> XSheaf {
        XSheaf::constant(Q, &SemilinearSet::parse(s).unwrap())
    }

    #[test]
    fn limits_over_shrinkings() {
        let kx = rho_star(&x("(-inf,+inf)"));
        assert_eq!(limit_sections(&kx, &SemilinearOpen::line()).unwrap(), 1);
        assert_eq!(limit_sections(&kx, &o("(0,1)+(1,2)")).unwrap(), 2);
        let closed = rho_star(&x("[0,1]"));
        assert_eq!(limit_sections(&closed, &o("(0,1)")).unwrap(), 1);
        assert_eq!(limit_sections(&ConstructibleTSheaf::zero(Q), &o("(0,1)")).unwrap(), 0);
    }

    #[test]
    fn unit_of_shriek_is_iso() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let f = ConstructibleTSheaf::random(&mut rng, Q, vec![int(0), rat(1, 2), int(2)], 2);
            let back = rho_inv_ind(&rho_shriek_system(&f), f.complex()).unwrap();
            assert!(back.data().is_isomorphic(&f).unwrap());
        }
    }

    #[test]
    fn shriek_sections_against_limits() {
        let f = rho_star(&x("[0,1]"));
        let s = rho_shriek_system(&f);
        // sections over any open of ρ⁻¹ρ_!F are those of F
        for u in ["(-1,1/2)", "(1/2,3)", "(-inf,+inf)", "(-inf,0)"] {
            assert_eq!(ind_limit_sections(&s, &o(u), f.endpoints()).unwrap(), f.section_dim(&o(u)).unwrap(), "{u}");
        }
    }

    #[test]
    fn adjunction_on_intervals() {
        let r = adjunction_check(&x("(0,1)"), &rho_star(&x("(0,2)"))).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = adjunction_check(&XSheaf::new(ConstructibleTSheaf::zero(Q)), &rho_star(&x("[0,1]"))).unwrap();
        assert!(r.passed() && r.hom_inv == 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let f = ConstructibleTSheaf::random(&mut rng, Q, vec![int(0), int(1)], 1);
            let g = ConstructibleTSheaf::random(&mut rng, Q, vec![rat(1, 2), int(1)], 1);
            let r = adjunction_check(&XSheaf::new(f), &g).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn shriek_is_exact_and_monoidal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let pts = [int(0), int(1)];
        let sub = random_flabby(&mut rng, Q, &pts, 1);
        let ses = random_ses(&mut rng, &sub, &pts, 1).unwrap();
        assert!(shriek_exact(&ses, 3).unwrap());
        let opens = [o("(0,1)"), o("(-1,2)"), o("(1/2,3/2)")];
        assert!(shriek_tensor_check(&x("(0,1)"), &x("[1/2,2)"), &opens).unwrap());
        // k_U ⊗ k_V through exhaustions
        let u = o("(0,2)");
        let v = o("(1,3)");
        let both = tensor_system(&rho_shriek_constant(Q, &u), &rho_shriek_constant(Q, &v));
        let meet = rho_shriek_constant(Q, &u.intersect(&v));
        for w in &opens {
            assert_eq!(ind_colimit_sections(&both, w).unwrap().dim, ind_colimit_sections(&meet, w).unwrap().dim);
        }
    }

    #[test]
    fn constant_on_the_site() {
        for u in ["(0,1)", "(0,1)+(2,3)", "(0,1)+(1,2)"] {
            assert!(site_constant_matches(Q, &o(u)).unwrap(), "{u}");
        }
    }

    #[test]
    fn site_maps() {
        let shift = SiteMap::Line(PiecewiseAffine::affine(int(1), int(1)).unwrap());
        let f = rho_star(&x("(0,1)"));
        assert!(pushforward(&shift, &f).unwrap().is_isomorphic(&rho_star(&x("(1,2)"))).unwrap());
        let double = SiteMap::Line(PiecewiseAffine::affine(int(2), int(0)).unwrap());
        let g = rho_star(&x("[0,1/2]"));
        let pushed = pushforward(&double, &g).unwrap();
        assert_eq!(pushed.section_dim(&o("(0,2)")).unwrap(), g.section_dim(&o("(0,1)")).unwrap());
        let flip = SiteMap::Line(PiecewiseAffine::parse("0:0 1:-3 ; -1 ; -1/2").unwrap());
        let samples = [o("(-1,1)"), o("(-4,-2)+(0,5)"), o("(-3,-1)")];
        assert!(section_contract(&flip, &g, &samples).unwrap());
        assert!(section_contract(&SiteMap::Inclusion(o("(0,1/4)+(1/3,2)")), &g, &samples).unwrap());
        assert!(pushforward(&SiteMap::ToPoint, &g).is_err());
        assert_eq!(pushforward_to_point(&rho_star(&x("(-inf,+inf)"))).unwrap(), 1);
        assert!(PiecewiseAffine::parse("0:0 1:0 ; 1 ; 1").is_err());
        let sky = ConstructibleTSheaf::skyscraper(Q, int(1));
        assert!(is_flabby(&pushforward(&flip, &sky).unwrap()).unwrap().holds);
    }

    #[test]
    fn inverse_image_of_flabby_is_c_soft() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let g = random_flabby(&mut rng, Q, &[int(0), int(2)], 2);
        assert!(is_c_soft(rho_inv(&g).data()).unwrap().holds);
    }

    #[test]
    fn finite_pushforward_of_flabby_is_acyclic() {
        let p = Arc::new(FinitePoset::with_indices(3, &[(0, 1), (0, 2)]).unwrap());
        let pt = Arc::new(FinitePoset::with_indices(1, &[]).unwrap());
        let flabby = CellularSheaf::constant(Q, p.clone(), &[false, true, false]).unwrap();
        assert_eq!(first_derived_pushforward(&pt, &[0, 0, 0], &flabby).unwrap(), vec![0]);
        // k on the two open points is not flabby and has H¹ ≠ 0 over the open {1,2}? it is a disjoint union
        let kx = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        assert_eq!(first_derived_pushforward(&pt, &[0, 0, 0], &kx).unwrap(), vec![0]);
        assert_eq!(pushforward_finite(&pt, &[0, 0, 0], &kx).unwrap().dim(0), 1);
    }
}
