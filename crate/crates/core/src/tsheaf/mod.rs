//! Sheaves on the T-site of the rational line, represented by cellular data on
//! the decomposition cut out by a finite endpoint set. Two representations
//! that differ by refinement describe the same object.

mod eval;
mod format;
mod gluing;
mod ind;

use std::sync::Arc;

use rand::Rng;

use crate::cellsheaf::{hom_space, sheaf_hom, CellularSheaf, FinitePoset, Mask, Sections, SheafMap};
use crate::error::{Error, Result};
use crate::exactla::{Field, Matrix};
use crate::lineorder::{CellComplex, Rat, SemilinearOpen, SemilinearSet};

pub use eval::{evaluate, Evaluation, LocalModel, PeriodicSum};
pub use format::{parse_line_sheaf, write_line_sheaf};
pub use gluing::{covering_exact, sheaf_axioms_check, ConstantPresheaf, GluingReport, TPresheaf};
pub use ind::{
    closure_sections_dim, ind_colimit_sections, rho_shriek_constant, rho_shriek_map_stage, rho_shriek_system, shriek_stage, IndColimit,
    IndSheaf,
};

/// The cell poset of a decomposition, labelled by the cells.
pub fn cell_poset(c: &CellComplex) -> Arc<FinitePoset> {
    let labels = (0..c.len()).map(|i| c.cell(i).to_string()).collect();
    Arc::new(FinitePoset::new(labels, &c.hasse()).expect("the cell order is a zigzag"))
}

/// A constructible sheaf: cellular data on the cells of a finite endpoint set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructibleTSheaf {
    complex: CellComplex,
    sheaf: CellularSheaf,
}

/// Sections over an open, computed on a particular decomposition.
#[derive(Clone, Debug)]
pub struct TSections {
    pub complex: CellComplex,
    pub mask: Mask,
    pub sections: Sections,
}

impl TSections {
    pub fn dim(&self) -> usize {
        self.sections.dim()
    }
}

impl ConstructibleTSheaf {
    pub fn new(complex: CellComplex, sheaf: CellularSheaf) -> Result<Self> {
        let poset = cell_poset(&complex);
        if sheaf.poset().hasse() != poset.hasse() || sheaf.poset().len() != poset.len() {
            return Err(Error::Shape(format!("cellular data does not fit the cells of {complex}")));
        }
        let sheaf = sheaf.rebase(poset)?;
        Ok(ConstructibleTSheaf { complex, sheaf })
    }

    /// Stalk dimensions per cell and one matrix per covering relation, in the
    /// order of [`CellComplex::hasse`].
    pub fn from_data(field: Field, endpoints: Vec<Rat>, dims: Vec<usize>, maps: Vec<Matrix>) -> Result<Self> {
        let complex = CellComplex::new(endpoints);
        let sheaf = CellularSheaf::new(field, cell_poset(&complex), dims, maps)?;
        Ok(ConstructibleTSheaf { complex, sheaf })
    }

    pub fn zero(field: Field) -> Self {
        let complex = CellComplex::default();
        let sheaf = CellularSheaf::zero(field, cell_poset(&complex));
        ConstructibleTSheaf { complex, sheaf }
    }

    /// `k_Z`: the constant sheaf on `Z` extended by zero.
    pub fn constant(field: Field, z: &SemilinearSet) -> Self {
        let complex = CellComplex::new(z.endpoints());
        let mask = complex.mask_of(z).expect("Z is a union of its own cells");
        let sheaf = CellularSheaf::constant(field, cell_poset(&complex), &mask).expect("every subset of a zigzag is convex");
        ConstructibleTSheaf { complex, sheaf }
    }

    pub fn skyscraper(field: Field, q: Rat) -> Self {
        Self::constant(field, &SemilinearSet::point(q))
    }

    /// Uniformly random stalk dimensions up to `max_dim` and small integer maps.
    pub fn random<R: Rng>(rng: &mut R, field: Field, endpoints: Vec<Rat>, max_dim: usize) -> Self {
        let complex = CellComplex::new(endpoints);
        let poset = cell_poset(&complex);
        let dims: Vec<usize> = (0..complex.len()).map(|_| rng.gen_range(0..=max_dim)).collect();
        let maps = poset
            .hasse()
            .iter()
            .map(|&(p, q)| {
                Matrix::from_fn(field, dims[q], dims[p], |_, _| field.int(rng.gen_range(-2..=2)))
            })
            .collect();
        let sheaf = CellularSheaf::new(field, poset, dims, maps).expect("zigzag data is always functorial");
        ConstructibleTSheaf { complex, sheaf }
    }

    pub fn field(&self) -> Field {
        self.sheaf.field()
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn endpoints(&self) -> &[Rat] {
        self.complex.endpoints()
    }

    pub fn sheaf(&self) -> &CellularSheaf {
        &self.sheaf
    }

    pub fn is_zero(&self) -> bool {
        self.sheaf.is_zero()
    }

    /// Stalk dimension at the cell containing `x`.
    pub fn stalk_dim(&self, x: &Rat) -> usize {
        self.sheaf.dim(self.complex.locate(x))
    }

    /// The same sheaf on a finer decomposition.
    pub fn refine_to(&self, fine: &CellComplex) -> Result<Self> {
        let g = fine.map_to(&self.complex)?;
        let sheaf = self.sheaf.pullback(cell_poset(fine), &g)?;
        Ok(ConstructibleTSheaf {
            complex: fine.clone(),
            sheaf,
        })
    }

    pub fn refine(&self, extra: &[Rat]) -> Self {
        let (fine, _) = self.complex.refine(extra);
        self.refine_to(&fine).expect("refinements are finer")
    }

    /// Drops endpoints across which the data is locally constant.
    pub fn simplify(&self) -> Self {
        let mut cur = self.clone();
        'outer: loop {
            let c = &cur.complex;
            for k in 0..c.endpoints().len() {
                let v = 2 * k + 1;
                let left = cur.sheaf.edge_map(v, v - 1);
                let right = cur.sheaf.edge_map(v, v + 1);
                let (Some(_), Some(ri)) = (left.inverse(), right.inverse()) else {
                    continue;
                };
                // merge (e_{k-1}, e_k), {e_k}, (e_k, e_{k+1}) into one edge, in the left edge's basis
                let glue = left.mul(&ri);
                let mut ends = c.endpoints().to_vec();
                ends.remove(k);
                let coarse = CellComplex::new(ends);
                let poset = cell_poset(&coarse);
                let old = |i: usize| if i < v { i } else { i + 2 };
                let dims: Vec<usize> = (0..coarse.len()).map(|i| cur.sheaf.dim(old(i))).collect();
                let maps = poset
                    .hasse()
                    .iter()
                    .map(|&(a, b)| {
                        if a == v && b == v - 1 {
                            // the vertex to the right of the merged edge
                            glue.mul(cur.sheaf.edge_map(v + 2, v + 1))
                        } else {
                            cur.sheaf.edge_map(old(a), old(b)).clone()
                        }
                    })
                    .collect();
                let sheaf = CellularSheaf::new(cur.field(), poset, dims, maps).expect("zigzag data");
                cur = ConstructibleTSheaf { complex: coarse, sheaf };
                continue 'outer;
            }
            return cur;
        }
    }

    fn complex_with(&self, sets: &[&SemilinearSet]) -> CellComplex {
        let extra: Vec<Rat> = sets.iter().flat_map(|s| s.endpoints()).collect();
        self.complex.refine(&extra).0
    }

    /// Sections over `u` on the decomposition by `E ∪ ∂U`.
    pub fn sections(&self, u: &SemilinearOpen) -> Result<TSections> {
        let c = self.complex_with(&[u.as_set()]);
        self.sections_on(&c, u)
    }

    pub fn sections_on(&self, c: &CellComplex, u: &SemilinearOpen) -> Result<TSections> {
        let f = self.refine_to(c)?;
        let mask = c.mask_of(u.as_set())?;
        let sections = f.sheaf.sections(&mask)?;
        Ok(TSections {
            complex: c.clone(),
            mask,
            sections,
        })
    }

    pub fn section_dim(&self, u: &SemilinearOpen) -> Result<usize> {
        Ok(self.sections(u)?.dim())
    }

    /// Change of basis from sections on a coarse decomposition to a finer one.
    fn lift(&self, coarse: &TSections, fine: &TSections) -> Result<Matrix> {
        let g = fine.complex.map_to(&coarse.complex)?;
        if fine.sections.elems.is_empty() {
            return Ok(Matrix::zeros(self.field(), 0, coarse.dim()));
        }
        let legs: Vec<Matrix> = fine
            .sections
            .elems
            .iter()
            .map(|&c| coarse.sections.component(g[c]).cloned().ok_or_else(|| Error::Shape("cells disagree".into())))
            .collect::<Result<_>>()?;
        fine.sections.limit.factor_cone(&legs)
    }

    /// Re-expresses `Γ(U;F)` computed on `from` in the basis computed on `to`.
    pub fn transport(&self, from: &TSections, to: &TSections) -> Result<Matrix> {
        if from.complex == to.complex {
            return Ok(Matrix::identity(self.field(), from.dim()));
        }
        let fine = from.complex.common_refinement(&to.complex);
        let u = SemilinearOpen::new(from.complex.set_of(&from.mask))?;
        let s = self.sections_on(&fine, &u)?;
        let a = self.lift(from, &s)?;
        let b = self.lift(to, &s)?;
        b.solve(&a).ok_or_else(|| Error::Certificate("section bases do not correspond".into()))
    }

    /// `Γ(V;F) → Γ(U;F)` for `U ⊆ V`, in the bases of [`ConstructibleTSheaf::sections`].
    pub fn restriction(&self, v: &SemilinearOpen, u: &SemilinearOpen) -> Result<Matrix> {
        if !u.is_subset(v) {
            return Err(Error::Shape(format!("{u} is not inside {v}")));
        }
        let sv = self.sections(v)?;
        let su = self.sections(u)?;
        self.restriction_between(&sv, &su)
    }

    /// Restriction between section spaces computed on possibly different decompositions.
    pub fn restriction_between(&self, sv: &TSections, su: &TSections) -> Result<Matrix> {
        let fine = sv.complex.common_refinement(&su.complex);
        let f = self.refine_to(&fine)?;
        let v = SemilinearOpen::new(sv.complex.set_of(&sv.mask))?;
        let u = SemilinearOpen::new(su.complex.set_of(&su.mask))?;
        let fv = self.sections_on(&fine, &v)?;
        let fu = self.sections_on(&fine, &u)?;
        let r = f.sheaf.restriction(&fv.sections, &fu.sections)?;
        let lv = self.lift(sv, &fv)?;
        let lu = self.lift(su, &fu)?;
        lu.solve(&r.mul(&lv))
            .ok_or_else(|| Error::Certificate("restriction does not factor".into()))
    }

    /// Both sheaves on the decomposition by the union of their endpoints.
    pub fn align(&self, other: &Self) -> Result<(Self, Self)> {
        let c = self.complex.common_refinement(&other.complex);
        Ok((self.refine_to(&c)?, other.refine_to(&c)?))
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other)?;
        Ok(ConstructibleTSheaf {
            sheaf: a.sheaf.direct_sum(&b.sheaf)?,
            complex: a.complex,
        })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other)?;
        Ok(ConstructibleTSheaf {
            sheaf: a.sheaf.tensor(&b.sheaf)?,
            complex: a.complex,
        })
    }

    /// The internal hom sheaf.
    pub fn hom_sheaf(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other)?;
        Ok(ConstructibleTSheaf {
            sheaf: sheaf_hom(&a.sheaf, &b.sheaf)?,
            complex: a.complex,
        })
    }

    pub fn hom_dim(&self, other: &Self) -> Result<usize> {
        let (a, b) = self.align(other)?;
        Ok(hom_space(&a.sheaf, &b.sheaf)?.dim())
    }

    /// An isomorphism to `other`, searched among seeded random combinations of
    /// a hom basis. Over an infinite field a random combination of an
    /// isomorphic pair is invertible with probability one; over small prime
    /// fields a few retries are made.
    pub fn find_isomorphism(&self, other: &Self) -> Result<Option<TSheafMap>> {
        let (a, b) = self.align(other)?;
        if a.sheaf.dims() != b.sheaf.dims() {
            return Ok(None);
        }
        let h = hom_space(&a.sheaf, &b.sheaf)?;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x5eed);
        for _ in 0..16 {
            let c = Matrix::from_fn(a.field(), h.dim(), 1, |_, _| a.field().int(rng.gen_range(-1000..=1000)));
            let m = h.combination(&c);
            if m.is_iso() {
                return Ok(Some(TSheafMap::from_parts(a.clone(), b.clone(), m)?));
            }
        }
        Ok(None)
    }

    pub fn is_isomorphic(&self, other: &Self) -> Result<bool> {
        Ok(self.find_isomorphism(other)?.is_some())
    }
}

/// A morphism of constructible sheaves, stored on a common decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSheafMap {
    pub source: ConstructibleTSheaf,
    pub target: ConstructibleTSheaf,
    pub map: SheafMap,
}

impl TSheafMap {
    fn from_parts(source: ConstructibleTSheaf, target: ConstructibleTSheaf, map: SheafMap) -> Result<Self> {
        if source.complex != target.complex {
            return Err(Error::Shape("source and target on different decompositions".into()));
        }
        Ok(TSheafMap { source, target, map })
    }

    /// Components per cell of the common refinement of source and target.
    pub fn new(source: &ConstructibleTSheaf, target: &ConstructibleTSheaf, comps: Vec<Matrix>) -> Result<Self> {
        let (a, b) = source.align(target)?;
        let map = SheafMap::new(a.sheaf.clone(), b.sheaf.clone(), comps)?;
        Self::from_parts(a, b, map)
    }

    pub fn identity(f: &ConstructibleTSheaf) -> Self {
        TSheafMap {
            source: f.clone(),
            target: f.clone(),
            map: SheafMap::identity(&f.sheaf),
        }
    }

    pub fn zero(source: &ConstructibleTSheaf, target: &ConstructibleTSheaf) -> Result<Self> {
        let (a, b) = source.align(target)?;
        let map = SheafMap::zero(&a.sheaf, &b.sheaf);
        Self::from_parts(a, b, map)
    }

    /// The map `k_A → k_B` that is the identity on every cell of `A ∩ B`.
    pub fn between_constants(field: Field, a: &SemilinearSet, b: &SemilinearSet) -> Result<Self> {
        let ka = ConstructibleTSheaf::constant(field, a);
        let kb = ConstructibleTSheaf::constant(field, b);
        let (ka, kb) = ka.align(&kb)?;
        let comps = (0..ka.complex.len())
            .map(|i| {
                let (r, c) = (kb.sheaf.dim(i), ka.sheaf.dim(i));
                if r == 1 && c == 1 {
                    Matrix::identity(field, 1)
                } else {
                    Matrix::zeros(field, r, c)
                }
            })
            .collect();
        let map = SheafMap::new(ka.sheaf.clone(), kb.sheaf.clone(), comps)?;
        Self::from_parts(ka, kb, map)
    }

    pub fn complex(&self) -> &CellComplex {
        &self.source.complex
    }

    pub fn refine_to(&self, fine: &CellComplex) -> Result<Self> {
        let g = fine.map_to(self.complex())?;
        let source = self.source.refine_to(fine)?;
        let target = self.target.refine_to(fine)?;
        let comps = g.iter().map(|&c| self.map.comps[c].clone()).collect();
        let map = SheafMap::new_unchecked(source.sheaf.clone(), target.sheaf.clone(), comps)?;
        Ok(TSheafMap { source, target, map })
    }

    /// `self ∘ first`, after aligning decompositions.
    pub fn after(&self, first: &TSheafMap) -> Result<TSheafMap> {
        let c = self.complex().common_refinement(first.complex());
        let a = self.refine_to(&c)?;
        let b = first.refine_to(&c)?;
        let map = a.map.after(&b.map)?;
        Ok(TSheafMap {
            source: b.source,
            target: a.target,
            map,
        })
    }

    fn wrap(&self, f: &CellularSheaf) -> ConstructibleTSheaf {
        ConstructibleTSheaf {
            complex: self.complex().clone(),
            sheaf: f.clone(),
        }
    }

    fn wrap_map(&self, m: SheafMap) -> TSheafMap {
        TSheafMap {
            source: self.wrap(&m.source),
            target: self.wrap(&m.target),
            map: m,
        }
    }

    /// The kernel with its inclusion.
    pub fn kernel(&self) -> TSheafMap {
        self.wrap_map(self.map.kernel())
    }

    /// The cokernel with its projection.
    pub fn cokernel(&self) -> TSheafMap {
        self.wrap_map(self.map.cokernel())
    }

    pub fn image(&self) -> TSheafMap {
        self.wrap_map(self.map.image())
    }

    pub fn is_mono(&self) -> bool {
        self.map.is_mono()
    }

    pub fn is_epi(&self) -> bool {
        self.map.is_epi()
    }

    pub fn is_iso(&self) -> bool {
        self.map.is_iso()
    }

    pub fn is_zero(&self) -> bool {
        self.map.is_zero()
    }

    /// The induced map `Γ(U;F) → Γ(U;G)` in the bases of [`ConstructibleTSheaf::sections`].
    pub fn on_sections(&self, u: &SemilinearOpen) -> Result<Matrix> {
        let fine = self.complex().refine(&u.endpoints()).0;
        let m = self.refine_to(&fine)?;
        let mask = fine.mask_of(u.as_set())?;
        let fs = m.source.sheaf.sections(&mask)?;
        let gs = m.target.sheaf.sections(&mask)?;
        let raw = m.map.between_sections(&fs, &gs)?;
        let wrap = |sections| TSections {
            complex: fine.clone(),
            mask: mask.clone(),
            sections,
        };
        let (fs, gs) = (wrap(fs), wrap(gs));
        let a = self.source.transport(&self.source.sections(u)?, &fs)?;
        let b = self.target.transport(&gs, &self.target.sections(u)?)?;
        Ok(b.mul(&raw).mul(&a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineorder::{int, rat};

    const Q: Field = Field::Rational;

    fn o(s: &str) -> SemilinearOpen {
        SemilinearOpen::parse(s).unwrap()
    }

    fn set(s: &str) -> SemilinearSet {
        SemilinearSet::parse(s).unwrap()
    }

    fn k(s: &str) -> ConstructibleTSheaf {
        ConstructibleTSheaf::constant(Q, &set(s))
    }

    #[test]
    fn maps_between_constants() {
        assert!(TSheafMap::between_constants(Q, &set("(0,1)"), &set("(0,2)")).is_ok());
        assert!(TSheafMap::between_constants(Q, &set("(0,2)"), &set("(0,1)")).is_err());
        let r = TSheafMap::between_constants(Q, &set("(0,3)"), &set("[1,2]")).unwrap();
        assert!(r.is_epi());
    }

    #[test]
    fn constant_sheaf_stalks() {
        let f = k("(0,1)");
        assert_eq!(f.sheaf().dims(), &[0, 0, 1, 0, 0]);
        assert_eq!(f.section_dim(&o("(0,1)")).unwrap(), 1);
        assert_eq!(f.section_dim(&o("(0,2)")).unwrap(), 0);
        assert_eq!(k("(0,2)").section_dim(&o("(0,1)+(1,2)")).unwrap(), 2);
    }

    #[test]
    fn refinement_does_not_change_sections() {
        let f = k("(0,2)");
        let g = f.refine(&[int(1), rat(1, 3)]);
        for u in ["(0,1)", "(-1,3)", "(1/2,1)+(3/2,5/2)"] {
            assert_eq!(f.section_dim(&o(u)).unwrap(), g.section_dim(&o(u)).unwrap());
        }
        assert_eq!(g.simplify(), f);
    }

    #[test]
    fn restriction_composes() {
        let f = k("(0,3)");
        let w = o("(0,3)");
        let v = o("(0,1)+(3/2,3)");
        let u = o("(1/2,1)+(2,5/2)");
        let wv = f.restriction(&w, &v).unwrap();
        let vu = f.restriction(&v, &u).unwrap();
        let wu = f.restriction(&w, &u).unwrap();
        assert_eq!(vu.mul(&wv), wu);
        assert_eq!(wu.rank(), 1);
    }

    #[test]
    fn cokernel_of_inclusion_is_closed_interval() {
        let m = TSheafMap::between_constants(Q, &set("(0,1)+(2,3)"), &set("(0,3)")).unwrap();
        assert!(m.is_mono());
        let c = m.cokernel().target;
        assert!(c.is_isomorphic(&k("[1,2]")).unwrap());
    }

    #[test]
    fn tensor_of_constants() {
        let t = k("(0,2)").tensor(&k("(1,3)")).unwrap();
        assert!(t.is_isomorphic(&k("(1,2)")).unwrap());
    }

    #[test]
    fn hom_between_extensions_by_zero() {
        assert_eq!(k("(0,2)").hom_dim(&k("(0,1)")).unwrap(), 0);
        assert_eq!(k("(0,1)").hom_dim(&k("(0,2)")).unwrap(), 1);
        let f = k("(0,1)");
        let ff = f.direct_sum(&f).unwrap();
        assert_eq!(f.hom_dim(&ff).unwrap(), 2 * f.hom_dim(&f).unwrap());
    }

    #[test]
    fn map_on_sections_matches_direct_computation() {
        let f = k("(0,3)");
        let id = TSheafMap::identity(&f);
        let u = o("(0,1)+(2,3)");
        assert!(id.on_sections(&u).unwrap().is_identity());
    }
}
