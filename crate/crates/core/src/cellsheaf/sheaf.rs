use std::sync::Arc;

use super::poset::{mask_subset, FinitePoset, Mask};
use crate::error::{Error, Result};
use crate::exactla::{Field, FinDiagram, Limit, Matrix};

/// A sheaf on a finite poset, stored as a functor: a stalk per element and a
/// generization map `F_p → F_q` per covering relation `p ⋖ q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellularSheaf {
    field: Field,
    poset: Arc<FinitePoset>,
    dims: Vec<usize>,
    maps: Vec<Matrix>,
}

/// The space of sections over an up-set, with its projection to each stalk.
#[derive(Clone, Debug)]
pub struct Sections {
    pub elems: Vec<usize>,
    pub limit: Limit,
}

impl Sections {
    pub fn dim(&self) -> usize {
        self.limit.dim
    }

    /// The projection `Γ(U;F) → F_p`.
    pub fn component(&self, p: usize) -> Option<&Matrix> {
        self.elems
            .iter()
            .position(|&q| q == p)
            .map(|i| &self.limit.projections[i])
    }
}

impl CellularSheaf {
    pub fn new(field: Field, poset: Arc<FinitePoset>, dims: Vec<usize>, maps: Vec<Matrix>) -> Result<Self> {
        let f = Self::new_unchecked(field, poset, dims, maps)?;
        f.check_functorial()?;
        Ok(f)
    }

    /// Checks shapes but not functoriality.
    pub fn new_unchecked(field: Field, poset: Arc<FinitePoset>, dims: Vec<usize>, maps: Vec<Matrix>) -> Result<Self> {
        if dims.len() != poset.len() || maps.len() != poset.hasse().len() {
            return Err(Error::Shape("stalk or map count does not match the poset".into()));
        }
        for (&(p, q), m) in poset.hasse().iter().zip(&maps) {
            if m.shape() != (dims[q], dims[p]) || m.field() != field {
                return Err(Error::Shape(format!(
                    "map {}->{} is {}x{}, expected {}x{}",
                    poset.label(p),
                    poset.label(q),
                    m.rows(),
                    m.cols(),
                    dims[q],
                    dims[p]
                )));
            }
        }
        Ok(CellularSheaf {
            field,
            poset,
            dims,
            maps,
        })
    }

    pub fn from_fn(
        field: Field,
        poset: Arc<FinitePoset>,
        dims: Vec<usize>,
        mut f: impl FnMut(usize, usize) -> Matrix,
    ) -> Result<Self> {
        let maps = poset.hasse().iter().map(|&(p, q)| f(p, q)).collect();
        Self::new(field, poset, dims, maps)
    }

    pub fn zero(field: Field, poset: Arc<FinitePoset>) -> Self {
        let dims = vec![0; poset.len()];
        let maps = poset.hasse().iter().map(|_| Matrix::zeros(field, 0, 0)).collect();
        CellularSheaf {
            field,
            poset,
            dims,
            maps,
        }
    }

    /// The constant sheaf on a locally closed subset, extended by zero.
    pub fn constant(field: Field, poset: Arc<FinitePoset>, support: &[bool]) -> Result<Self> {
        if !poset.is_convex(support) {
            return Err(Error::InvalidParameters(format!(
                "support {:?} is not locally closed",
                poset.describe(support)
            )));
        }
        let dims: Vec<usize> = support.iter().map(|&b| b as usize).collect();
        let maps = poset
            .hasse()
            .iter()
            .map(|&(p, q)| {
                if support[p] && support[q] {
                    Matrix::identity(field, 1)
                } else {
                    Matrix::zeros(field, dims[q], dims[p])
                }
            })
            .collect();
        Ok(CellularSheaf {
            field,
            poset,
            dims,
            maps,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn poset(&self) -> &Arc<FinitePoset> {
        &self.poset
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, p: usize) -> usize {
        self.dims[p]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    pub fn support(&self) -> Mask {
        self.dims.iter().map(|&d| d > 0).collect()
    }

    pub fn edge_maps(&self) -> &[Matrix] {
        &self.maps
    }

    /// The generization map along a covering relation.
    pub fn edge_map(&self, p: usize, q: usize) -> &Matrix {
        let i = self.poset.hasse_index(p, q).expect("not a covering relation");
        &self.maps[i]
    }

    /// Composite generization maps `F_p → F_q` for every `q ≥ p`, along
    /// breadth-first paths.
    fn maps_from(&self, p: usize) -> Vec<Option<Matrix>> {
        let n = self.poset.len();
        let mut out: Vec<Option<Matrix>> = vec![None; n];
        out[p] = Some(Matrix::identity(self.field, self.dims[p]));
        let mut queue = std::collections::VecDeque::from([p]);
        while let Some(q) = queue.pop_front() {
            for &r in self.poset.covers_above(q) {
                if out[r].is_none() {
                    let m = self.edge_map(q, r).mul(out[q].as_ref().unwrap());
                    out[r] = Some(m);
                    queue.push_back(r);
                }
            }
        }
        out
    }

    /// The generization map `F_p → F_q` for `p ≤ q`.
    pub fn map(&self, p: usize, q: usize) -> Matrix {
        assert!(self.poset.leq(p, q), "map requested between incomparable elements");
        if p == q {
            return Matrix::identity(self.field, self.dims[p]);
        }
        if let Some(i) = self.poset.hasse_index(p, q) {
            return self.maps[i].clone();
        }
        self.maps_from(p)[q].clone().unwrap()
    }

    /// All composites along different paths agree.
    pub fn check_functorial(&self) -> Result<()> {
        for p in 0..self.poset.len() {
            let reach = self.maps_from(p);
            for &(q, r) in self.poset.hasse() {
                if let (Some(mq), Some(mr)) = (&reach[q], &reach[r]) {
                    if self.edge_map(q, r).mul(mq) != *mr {
                        return Err(Error::NotFunctorial(format!(
                            "paths from {} to {} disagree",
                            self.poset.label(p),
                            self.poset.label(r)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Sections over an up-set: the limit of the stalks over it.
    pub fn sections(&self, u: &[bool]) -> Result<Sections> {
        self.poset.check_open(u)?;
        Ok(self.sections_unchecked(u))
    }

    pub(crate) fn sections_unchecked(&self, u: &[bool]) -> Sections {
        let elems = self.poset.elements(u);
        let mut pos = vec![usize::MAX; self.poset.len()];
        for (i, &p) in elems.iter().enumerate() {
            pos[p] = i;
        }
        let mut d = FinDiagram::new(self.field, elems.iter().map(|&p| self.dims[p]).collect());
        for (&(p, q), m) in self.poset.hasse().iter().zip(&self.maps) {
            if u[p] && u[q] {
                d.arrows.push((pos[p], pos[q], m.clone()));
            }
        }
        let limit = d.limit().expect("shapes were checked at construction");
        Sections { elems, limit }
    }

    pub fn section_dim(&self, u: &[bool]) -> Result<usize> {
        Ok(self.sections(u)?.dim())
    }

    pub fn global_sections(&self) -> Sections {
        self.sections_unchecked(&self.poset.full())
    }

    /// The restriction `Γ(U;F) → Γ(V;F)` for up-sets `V ⊆ U`, in the bases of [`CellularSheaf::sections`].
    pub fn restriction(&self, u: &Sections, v: &Sections) -> Result<Matrix> {
        let legs: Vec<Matrix> = v
            .elems
            .iter()
            .map(|&q| {
                u.component(q)
                    .cloned()
                    .ok_or_else(|| Error::Shape("restriction target is not inside the source".into()))
            })
            .collect::<Result<_>>()?;
        if legs.is_empty() {
            return Ok(Matrix::zeros(self.field, 0, u.dim()));
        }
        v.limit.factor_cone(&legs)
    }

    pub fn restriction_between(&self, u: &[bool], v: &[bool]) -> Result<Matrix> {
        if !mask_subset(v, u) {
            return Err(Error::Shape("restriction to a non-subset".into()));
        }
        let su = self.sections(u)?;
        let sv = self.sections(v)?;
        self.restriction(&su, &sv)
    }

    /// Sheaf on the induced subposet of `m`, with the new-to-old index map.
    pub fn restrict(&self, m: &[bool]) -> (CellularSheaf, Vec<usize>) {
        let (sub, idx) = self.poset.induced(m);
        let dims = idx.iter().map(|&p| self.dims[p]).collect();
        let maps = sub
            .hasse()
            .iter()
            .map(|&(a, b)| self.map(idx[a], idx[b]))
            .collect();
        let f = CellularSheaf {
            field: self.field,
            poset: Arc::new(sub),
            dims,
            maps,
        };
        (f, idx)
    }

    /// Pullback along a monotone map `g` from `target` into this sheaf's poset.
    pub fn pullback(&self, target: Arc<FinitePoset>, g: &[usize]) -> Result<CellularSheaf> {
        if g.len() != target.len() {
            return Err(Error::Shape("map length differs from poset size".into()));
        }
        for &(a, b) in target.hasse() {
            if !self.poset.leq(g[a], g[b]) {
                return Err(Error::InvalidSiteMap(format!(
                    "{} <= {} is not preserved",
                    target.label(a),
                    target.label(b)
                )));
            }
        }
        let dims = g.iter().map(|&p| self.dims[p]).collect();
        let maps = target.hasse().iter().map(|&(a, b)| self.map(g[a], g[b])).collect();
        CellularSheaf::new_unchecked(self.field, target, dims, maps)
    }

    /// Pushforward along a monotone map `g` into `target`: the stalk at `q`
    /// is the space of sections over the preimage of `↑q`.
    pub fn pushforward(&self, target: Arc<FinitePoset>, g: &[usize]) -> Result<CellularSheaf> {
        if g.len() != self.poset.len() || g.iter().any(|&q| q >= target.len()) {
            return Err(Error::Shape("map does not fit the posets".into()));
        }
        for &(a, b) in self.poset.hasse() {
            if !target.leq(g[a], g[b]) {
                return Err(Error::InvalidSiteMap(format!(
                    "{} <= {} is not preserved",
                    self.poset.label(a),
                    self.poset.label(b)
                )));
            }
        }
        let secs: Vec<Sections> = (0..target.len())
            .map(|q| {
                let pre: Mask = g.iter().map(|&x| target.leq(q, x)).collect();
                self.sections_unchecked(&pre)
            })
            .collect();
        let dims = secs.iter().map(Sections::dim).collect();
        let maps = target
            .hasse()
            .iter()
            .map(|&(a, b)| self.restriction(&secs[a], &secs[b]))
            .collect::<Result<_>>()?;
        CellularSheaf::new(self.field, target, dims, maps)
    }

    pub fn direct_sum(&self, other: &CellularSheaf) -> Result<CellularSheaf> {
        self.same_base(other)?;
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = self
            .maps
            .iter()
            .zip(&other.maps)
            .map(|(a, b)| Matrix::block_diag(self.field, &[a.clone(), b.clone()]))
            .collect();
        Ok(CellularSheaf {
            field: self.field,
            poset: self.poset.clone(),
            dims,
            maps,
        })
    }

    pub fn direct_sum_all(field: Field, poset: Arc<FinitePoset>, parts: &[CellularSheaf]) -> Result<CellularSheaf> {
        parts
            .iter()
            .try_fold(CellularSheaf::zero(field, poset), |acc, f| acc.direct_sum(f))
    }

    pub fn tensor(&self, other: &CellularSheaf) -> Result<CellularSheaf> {
        self.same_base(other)?;
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a * b).collect();
        let maps = self.maps.iter().zip(&other.maps).map(|(a, b)| a.kron(b)).collect();
        Ok(CellularSheaf {
            field: self.field,
            poset: self.poset.clone(),
            dims,
            maps,
        })
    }

    pub(crate) fn same_base(&self, other: &CellularSheaf) -> Result<()> {
        if self.field != other.field || self.poset != other.poset {
            return Err(Error::Shape("sheaves live on different posets or fields".into()));
        }
        Ok(())
    }

    /// The same data read on the opposite poset with dual stalks: maps are transposed.
    pub fn dual_opposite(&self) -> CellularSheaf {
        let op = Arc::new(self.poset.opposite());
        let maps = op
            .hasse()
            .iter()
            .map(|&(a, b)| self.edge_map(b, a).transpose())
            .collect();
        CellularSheaf {
            field: self.field,
            poset: op,
            dims: self.dims.clone(),
            maps,
        }
    }

    /// Same stalks and maps on an isomorphic copy of the poset.
    pub fn rebase(&self, poset: Arc<FinitePoset>) -> Result<CellularSheaf> {
        if poset.hasse() != self.poset.hasse() {
            return Err(Error::Shape("posets differ".into()));
        }
        Ok(CellularSheaf {
            poset,
            ..self.clone()
        })
    }
}

/// A natural transformation between two sheaves on the same poset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafMap {
    pub source: CellularSheaf,
    pub target: CellularSheaf,
    pub comps: Vec<Matrix>,
}

impl SheafMap {
    pub fn new(source: CellularSheaf, target: CellularSheaf, comps: Vec<Matrix>) -> Result<Self> {
        let m = Self::new_unchecked(source, target, comps)?;
        m.check_natural()?;
        Ok(m)
    }

    pub fn new_unchecked(source: CellularSheaf, target: CellularSheaf, comps: Vec<Matrix>) -> Result<Self> {
        source.same_base(&target)?;
        if comps.len() != source.poset.len() {
            return Err(Error::Shape("component count differs from poset size".into()));
        }
        for (p, c) in comps.iter().enumerate() {
            if c.shape() != (target.dims[p], source.dims[p]) {
                return Err(Error::Shape(format!("component at {} has the wrong shape", source.poset.label(p))));
            }
        }
        Ok(SheafMap { source, target, comps })
    }

    pub fn check_natural(&self) -> Result<()> {
        for &(p, q) in self.source.poset.hasse() {
            let left = self.target.edge_map(p, q).mul(&self.comps[p]);
            let right = self.comps[q].mul(self.source.edge_map(p, q));
            if left != right {
                return Err(Error::NotNatural(format!(
                    "square at {} <= {} does not commute",
                    self.source.poset.label(p),
                    self.source.poset.label(q)
                )));
            }
        }
        Ok(())
    }

    pub fn is_natural(&self) -> bool {
        self.check_natural().is_ok()
    }

    pub fn zero(source: &CellularSheaf, target: &CellularSheaf) -> SheafMap {
        let comps = (0..source.poset.len())
            .map(|p| Matrix::zeros(source.field, target.dims[p], source.dims[p]))
            .collect();
        SheafMap {
            source: source.clone(),
            target: target.clone(),
            comps,
        }
    }

    pub fn identity(f: &CellularSheaf) -> SheafMap {
        let comps = f.dims.iter().map(|&d| Matrix::identity(f.field, d)).collect();
        SheafMap {
            source: f.clone(),
            target: f.clone(),
            comps,
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &SheafMap) -> Result<SheafMap> {
        if first.target != self.source {
            return Err(Error::Shape("composition of non-composable maps".into()));
        }
        let comps = self.comps.iter().zip(&first.comps).map(|(a, b)| a.mul(b)).collect();
        Ok(SheafMap {
            source: first.source.clone(),
            target: self.target.clone(),
            comps,
        })
    }

    pub fn add(&self, other: &SheafMap) -> SheafMap {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect();
        SheafMap {
            comps,
            ..self.clone()
        }
    }

    pub fn scale(&self, s: &crate::exactla::Scalar) -> SheafMap {
        SheafMap {
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
            ..self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Matrix::is_zero)
    }

    pub fn is_mono(&self) -> bool {
        self.comps.iter().all(Matrix::is_injective)
    }

    pub fn is_epi(&self) -> bool {
        self.comps.iter().all(Matrix::is_surjective)
    }

    pub fn is_iso(&self) -> bool {
        self.is_mono() && self.is_epi()
    }

    pub fn inverse(&self) -> Option<SheafMap> {
        let comps = self.comps.iter().map(Matrix::inverse).collect::<Option<Vec<_>>>()?;
        Some(SheafMap {
            source: self.target.clone(),
            target: self.source.clone(),
            comps,
        })
    }

    /// The pointwise kernel with its inclusion into the source.
    pub fn kernel(&self) -> SheafMap {
        let f = &self.source;
        let ks: Vec<Matrix> = self.comps.iter().map(Matrix::kernel_basis).collect();
        let dims = ks.iter().map(Matrix::cols).collect();
        let maps = f
            .poset
            .hasse()
            .iter()
            .map(|&(p, q)| {
                ks[q]
                    .solve(&f.edge_map(p, q).mul(&ks[p]))
                    .expect("generization preserves kernels of a natural map")
            })
            .collect();
        let k = CellularSheaf {
            field: f.field,
            poset: f.poset.clone(),
            dims,
            maps,
        };
        SheafMap {
            source: k,
            target: f.clone(),
            comps: ks,
        }
    }

    /// The pointwise cokernel with the projection from the target.
    pub fn cokernel(&self) -> SheafMap {
        let g = &self.target;
        let cs: Vec<Matrix> = self.comps.iter().map(Matrix::cokernel_map).collect();
        let dims = cs.iter().map(Matrix::rows).collect();
        let maps = g
            .poset
            .hasse()
            .iter()
            .map(|&(p, q)| {
                cs[p]
                    .solve_left(&cs[q].mul(g.edge_map(p, q)))
                    .expect("generization preserves images of a natural map")
            })
            .collect();
        let c = CellularSheaf {
            field: g.field,
            poset: g.poset.clone(),
            dims,
            maps,
        };
        SheafMap {
            source: g.clone(),
            target: c,
            comps: cs,
        }
    }

    /// The pointwise image with its inclusion into the target.
    pub fn image(&self) -> SheafMap {
        self.cokernel().kernel()
    }

    /// The induced map on sections over an up-set, in the bases of [`CellularSheaf::sections`].
    pub fn on_sections(&self, u: &[bool]) -> Result<Matrix> {
        let su = self.source.sections(u)?;
        let tu = self.target.sections(u)?;
        self.between_sections(&su, &tu)
    }

    pub fn between_sections(&self, su: &Sections, tu: &Sections) -> Result<Matrix> {
        if tu.elems.is_empty() {
            return Ok(Matrix::zeros(self.source.field, 0, su.dim()));
        }
        let legs: Vec<Matrix> = tu
            .elems
            .iter()
            .map(|&p| self.comps[p].mul(su.component(p).unwrap()))
            .collect();
        tu.limit.factor_cone(&legs)
    }

    pub fn direct_sum(&self, other: &SheafMap) -> Result<SheafMap> {
        let source = self.source.direct_sum(&other.source)?;
        let target = self.target.direct_sum(&other.target)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| Matrix::block_diag(source.field, &[a.clone(), b.clone()]))
            .collect();
        Ok(SheafMap { source, target, comps })
    }

    pub fn tensor(&self, other: &SheafMap) -> Result<SheafMap> {
        let source = self.source.tensor(&other.source)?;
        let target = self.target.tensor(&other.target)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.kron(b)).collect();
        Ok(SheafMap { source, target, comps })
    }
}

/// Inclusions of the summands into `a ⊕ b` and projections back.
pub fn sum_structure(a: &CellularSheaf, b: &CellularSheaf) -> Result<(CellularSheaf, [SheafMap; 2], [SheafMap; 2])> {
    let s = a.direct_sum(b)?;
    let field = a.field;
    let n = a.poset.len();
    let inc_a = (0..n)
        .map(|p| Matrix::vstack(field, a.dims[p], &[Matrix::identity(field, a.dims[p]), Matrix::zeros(field, b.dims[p], a.dims[p])]))
        .collect();
    let inc_b = (0..n)
        .map(|p| Matrix::vstack(field, b.dims[p], &[Matrix::zeros(field, a.dims[p], b.dims[p]), Matrix::identity(field, b.dims[p])]))
        .collect();
    let pr_a = (0..n)
        .map(|p| Matrix::hstack(field, a.dims[p], &[Matrix::identity(field, a.dims[p]), Matrix::zeros(field, a.dims[p], b.dims[p])]))
        .collect();
    let pr_b = (0..n)
        .map(|p| Matrix::hstack(field, b.dims[p], &[Matrix::zeros(field, b.dims[p], a.dims[p]), Matrix::identity(field, b.dims[p])]))
        .collect();
    let mk = |src: &CellularSheaf, tgt: &CellularSheaf, comps| SheafMap {
        source: src.clone(),
        target: tgt.clone(),
        comps,
    };
    Ok((
        s.clone(),
        [mk(a, &s, inc_a), mk(b, &s, inc_b)],
        [mk(&s, a, pr_a), mk(&s, b, pr_b)],
    ))
}

/// A basis of the space of sheaf maps `F → G`.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub source: CellularSheaf,
    pub target: CellularSheaf,
    /// Each column is one basis map, vectorized component by component, row-major.
    pub basis: Matrix,
    offsets: Vec<usize>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    fn unvec(&self, v: &Matrix) -> SheafMap {
        let f = &self.source;
        let g = &self.target;
        let comps = (0..f.poset.len())
            .map(|p| {
                let (r, c) = (g.dims[p], f.dims[p]);
                Matrix::from_fn(f.field, r, c, |i, j| v.get(self.offsets[p] + i * c + j, 0).clone())
            })
            .collect();
        SheafMap {
            source: f.clone(),
            target: g.clone(),
            comps,
        }
    }

    pub fn element(&self, i: usize) -> SheafMap {
        self.unvec(&self.basis.col_vec(i))
    }

    /// The map with coordinates `c` (a column vector) in the basis.
    pub fn combination(&self, c: &Matrix) -> SheafMap {
        self.unvec(&self.basis.mul(c))
    }

    pub fn vectorize(&self, m: &SheafMap) -> Matrix {
        let total = *self.offsets.last().unwrap();
        let mut v = Matrix::zeros(self.source.field, total, 1);
        for (p, c) in m.comps.iter().enumerate() {
            for i in 0..c.rows() {
                for j in 0..c.cols() {
                    v.set(self.offsets[p] + i * c.cols() + j, 0, c.get(i, j).clone());
                }
            }
        }
        v
    }

    /// Coordinates of a natural map in the basis.
    pub fn coords(&self, m: &SheafMap) -> Result<Matrix> {
        self.basis
            .solve(&self.vectorize(m))
            .ok_or_else(|| Error::NotNatural("map is not in the hom space".into()))
    }
}

/// All natural maps `F → G`, as the solution space of the commutation constraints.
pub fn hom_space(f: &CellularSheaf, g: &CellularSheaf) -> Result<HomSpace> {
    f.same_base(g)?;
    let field = f.field;
    let n = f.poset.len();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut acc = 0;
    for p in 0..n {
        offsets.push(acc);
        acc += g.dims[p] * f.dims[p];
    }
    offsets.push(acc);
    let rows: usize = f.poset.hasse().iter().map(|&(p, q)| g.dims[q] * f.dims[p]).sum();
    let mut c = Matrix::zeros(field, rows, acc);
    let mut r = 0;
    for &(p, q) in f.poset.hasse() {
        let gm = g.edge_map(p, q);
        let fm = f.edge_map(p, q);
        let (gp, fp, gq, fq) = (g.dims[p], f.dims[p], g.dims[q], f.dims[q]);
        // (G(p,q) φ_p − φ_q F(p,q))[i][j]
        for i in 0..gq {
            for j in 0..fp {
                for k in 0..gp {
                    let e = gm.get(i, k);
                    if !e.is_zero() {
                        let col = offsets[p] + k * fp + j;
                        c.set(r, col, c.get(r, col) + e);
                    }
                }
                for k in 0..fq {
                    let e = fm.get(k, j);
                    if !e.is_zero() {
                        let col = offsets[q] + i * fq + k;
                        c.set(r, col, c.get(r, col) - e);
                    }
                }
                r += 1;
            }
        }
    }
    Ok(HomSpace {
        source: f.clone(),
        target: g.clone(),
        basis: c.kernel_basis(),
        offsets,
    })
}

/// The matrix of `φ ↦ ψ ∘ φ` from `Hom(F, G)` to `Hom(F, G′)` for `ψ: G → G′`.
pub fn hom_post(src: &HomSpace, dst: &HomSpace, psi: &SheafMap) -> Result<Matrix> {
    let cols = (0..src.dim())
        .map(|i| dst.coords(&psi.after(&src.element(i))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::hstack(psi.source.field, dst.dim(), &cols))
}

/// The matrix of `φ ↦ φ ∘ χ` from `Hom(F, G)` to `Hom(F′, G)` for `χ: F′ → F`.
pub fn hom_pre(src: &HomSpace, dst: &HomSpace, chi: &SheafMap) -> Result<Matrix> {
    let cols = (0..src.dim())
        .map(|i| dst.coords(&src.element(i).after(chi)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::hstack(chi.source.field, dst.dim(), &cols))
}

/// The internal hom sheaf: the stalk at `p` is `Hom(F|↑p, G|↑p)`.
pub fn sheaf_hom(f: &CellularSheaf, g: &CellularSheaf) -> Result<CellularSheaf> {
    f.same_base(g)?;
    let poset = f.poset.clone();
    let n = poset.len();
    let local: Vec<(HomSpace, Vec<usize>)> = (0..n)
        .map(|p| {
            let up = poset.up(p);
            let (fr, idx) = f.restrict(&up);
            let (gr, _) = g.restrict(&up);
            hom_space(&fr, &gr).map(|h| (h, idx))
        })
        .collect::<Result<_>>()?;
    let dims = local.iter().map(|(h, _)| h.dim()).collect();
    let maps = poset
        .hasse()
        .iter()
        .map(|&(p, q)| {
            let (hp, ip) = &local[p];
            let (hq, iq) = &local[q];
            let cols = (0..hp.dim())
                .map(|i| {
                    let m = hp.element(i);
                    let comps = iq
                        .iter()
                        .map(|x| m.comps[ip.iter().position(|y| y == x).unwrap()].clone())
                        .collect();
                    let restricted = SheafMap {
                        source: hq.source.clone(),
                        target: hq.target.clone(),
                        comps,
                    };
                    hq.coords(&restricted)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Matrix::hstack(f.field, hq.dim(), &cols))
        })
        .collect::<Result<_>>()?;
    CellularSheaf::new(f.field, poset, dims, maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rational;

    fn zigzag() -> Arc<FinitePoset> {
        // e1 <- v -> e2, elements e1, v, e2
        Arc::new(FinitePoset::new(vec!["e1".into(), "v".into(), "e2".into()], &[(1, 0), (1, 2)]).unwrap())
    }

    #[test]
    fn constant_sheaf_sections() {
        let p = zigzag();
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        assert_eq!(k.section_dim(&p.full()).unwrap(), 1);
        assert_eq!(k.section_dim(&[true, false, true]).unwrap(), 2);
    }

    #[test]
    fn extension_by_zero_has_no_global_sections() {
        let p = zigzag();
        let f = CellularSheaf::constant(Q, p.clone(), &[true, false, false]).unwrap();
        assert_eq!(f.section_dim(&p.full()).unwrap(), 0);
        assert_eq!(f.section_dim(&[true, false, false]).unwrap(), 1);
        assert!(f.sections(&[false, true, false]).is_err());
    }

    #[test]
    fn discrete_two_points() {
        let p = Arc::new(FinitePoset::with_indices(2, &[]).unwrap());
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        assert_eq!(k.section_dim(&p.full()).unwrap(), 2);
    }

    #[test]
    fn broken_functoriality_is_detected() {
        let p = Arc::new(FinitePoset::with_indices(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap());
        let id = Matrix::identity(Q, 1);
        let neg = id.neg();
        let maps = vec![id.clone(), id.clone(), id.clone(), neg];
        assert!(matches!(
            CellularSheaf::new(Q, p, vec![1; 4], maps),
            Err(Error::NotFunctorial(_))
        ));
    }

    #[test]
    fn kernels_cokernels_and_tensors() {
        let p = zigzag();
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        let id = SheafMap::identity(&k);
        assert!(id.kernel().source.is_zero());
        let zero_in = SheafMap::zero(&CellularSheaf::zero(Q, p.clone()), &k);
        assert_eq!(zero_in.cokernel().target.dims(), k.dims());
        let a = CellularSheaf::constant(Q, p.clone(), &[true, true, false]).unwrap();
        let b = CellularSheaf::constant(Q, p.clone(), &[false, true, true]).unwrap();
        let t = a.tensor(&b).unwrap();
        assert_eq!(t, CellularSheaf::constant(Q, p, &[false, true, false]).unwrap());
    }

    #[test]
    fn hom_dimensions() {
        let p = zigzag();
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        assert_eq!(hom_space(&k, &k).unwrap().dim(), 1);
        let kk = k.direct_sum(&k).unwrap();
        assert_eq!(hom_space(&k, &kk).unwrap().dim(), 2);
        let e1 = CellularSheaf::constant(Q, p.clone(), &[true, false, false]).unwrap();
        // a section of the extension by zero cannot survive through the zero stalk
        assert_eq!(hom_space(&k, &e1).unwrap().dim(), 0);
        assert_eq!(hom_space(&e1, &k).unwrap().dim(), 1);
    }

    #[test]
    fn restriction_maps_compose() {
        let p = zigzag();
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        let r = k.restriction_between(&p.full(), &[true, false, true]).unwrap();
        assert_eq!(r.shape(), (2, 1));
        assert_eq!(r.rank(), 1);
    }

    #[test]
    fn internal_hom_of_constant() {
        let p = zigzag();
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        let h = sheaf_hom(&k, &k).unwrap();
        assert_eq!(h.dims(), &[1, 1, 1]);
    }
}
