//! Finite Boolean algebras, their ultrafilters, and the spectrum of a finite
//! space with a distinguished family of opens.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::cellsheaf::{mask_intersect, mask_subset, mask_union, CellularSheaf, FinitePoset, Mask, SheafMap};
use crate::error::{Error, Result};
use crate::exactla::{Field, Matrix};

/// Atoms above which families are enumerated exhaustively.
const MAX_ATOMS: usize = 16;

/// The Boolean subalgebra of the power set of `0..carrier` generated by a
/// family of subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinBoolAlg {
    carrier: usize,
    atoms: Vec<Mask>,
    /// For each carrier element, the atom containing it.
    atom_of: Vec<usize>,
}

impl FinBoolAlg {
    /// Atoms are the classes of carrier elements lying in exactly the same generators.
    pub fn generated_by(carrier: usize, gens: &[Mask]) -> Result<Self> {
        if gens.iter().any(|g| g.len() != carrier) {
            return Err(Error::Shape("generator of the wrong length".into()));
        }
        let mut classes: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut atoms: Vec<Mask> = Vec::new();
        let mut atom_of = Vec::with_capacity(carrier);
        for x in 0..carrier {
            let sig: Vec<bool> = gens.iter().map(|g| g[x]).collect();
            let next = atoms.len();
            let a = *classes.entry(sig).or_insert(next);
            if a == next {
                atoms.push(vec![false; carrier]);
            }
            atoms[a][x] = true;
            atom_of.push(a);
        }
        Ok(FinBoolAlg { carrier, atoms, atom_of })
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn atoms(&self) -> &[Mask] {
        &self.atoms
    }

    pub fn atom_of(&self, x: usize) -> usize {
        self.atom_of[x]
    }

    pub fn contains(&self, s: &[bool]) -> bool {
        s.len() == self.carrier && (0..self.carrier).all(|x| s[x] == s[self.atoms[self.atom_of[x]].iter().position(|&b| b).unwrap()])
    }

    /// The atoms contained in an element.
    pub fn atoms_below(&self, s: &[bool]) -> Vec<bool> {
        self.atoms.iter().map(|a| mask_subset(a, s)).collect()
    }

    fn from_atoms(&self, pick: &[bool]) -> Mask {
        (0..self.carrier).map(|x| pick[self.atom_of[x]]).collect()
    }

    /// Every element, as the union of a subset of atoms.
    pub fn elements(&self) -> Result<Vec<Mask>> {
        let k = self.atoms.len();
        if k > MAX_ATOMS {
            return Err(Error::Oversize(format!("{k} atoms")));
        }
        Ok((0..1usize << k)
            .map(|bits| self.from_atoms(&(0..k).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>()))
            .collect())
    }

    pub fn complement(&self, s: &[bool]) -> Mask {
        s.iter().map(|b| !b).collect()
    }

    /// The ultrafilter of elements containing an atom.
    pub fn principal(&self, atom: usize) -> Result<Vec<Mask>> {
        Ok(self.elements()?.into_iter().filter(|s| mask_subset(&self.atoms[atom], s)).collect())
    }
}

/// Checks the ultrafilter axioms literally: the whole carrier belongs, the
/// empty set does not, membership of an intersection is membership of both
/// parts, and of each element exactly one of it and its complement belongs.
pub fn ultrafilter_validate(alg: &FinBoolAlg, family: &[Mask]) -> Result<bool> {
    if family.iter().any(|s| !alg.contains(s)) {
        return Ok(false);
    }
    let member = |s: &Mask| family.contains(s);
    let all = alg.elements()?;
    let full = vec![true; alg.carrier];
    if !member(&full) || member(&vec![false; alg.carrier]) {
        return Ok(false);
    }
    for a in &all {
        if member(a) == member(&alg.complement(a)) {
            return Ok(false);
        }
        for b in &all {
            if member(&mask_intersect(a, b)) != (member(a) && member(b)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Closes a family under finite unions and intersections and adds `∅`.
pub fn lattice_closure(carrier: usize, gens: &[Mask]) -> Vec<Mask> {
    let mut out: Vec<Mask> = vec![vec![false; carrier]];
    let mut frontier: Vec<Mask> = gens.to_vec();
    while let Some(s) = frontier.pop() {
        if out.contains(&s) {
            continue;
        }
        for t in out.clone() {
            frontier.push(mask_union(&s, &t));
            frontier.push(mask_intersect(&s, &t));
        }
        out.push(s);
    }
    out.sort();
    out
}

/// The spectrum of a finite space with distinguished opens `members`: the
/// ultrafilters of the algebra they generate that contain some member. All
/// are principal, so points are atoms; the basic open `Ũ` is the set of
/// atoms inside `U`.
#[derive(Clone, Debug)]
pub struct FiniteSpectrum {
    pub algebra: FinBoolAlg,
    pub members: Vec<Mask>,
    /// Atom index of each point.
    pub points: Vec<usize>,
    /// Specialization order on the points; opens are up-sets.
    pub poset: Arc<FinitePoset>,
    /// `Ũ` for each member, as a mask on the points.
    pub basis: Vec<Mask>,
    /// For each point, the smallest member containing it.
    pub smallest: Vec<usize>,
}

impl FiniteSpectrum {
    /// `members` must be closed under finite unions and intersections.
    pub fn new(carrier: usize, members: Vec<Mask>) -> Result<Self> {
        for a in &members {
            for b in &members {
                if !members.contains(&mask_union(a, b)) || !members.contains(&mask_intersect(a, b)) {
                    return Err(Error::InvalidParameters("distinguished family not closed under ∪ and ∩".into()));
                }
            }
        }
        let algebra = FinBoolAlg::generated_by(carrier, &members)?;
        let points: Vec<usize> = (0..algebra.atoms.len())
            .filter(|&a| members.iter().any(|u| mask_subset(&algebra.atoms[a], u)))
            .collect();
        let inside = |a: usize, u: &Mask| mask_subset(&algebra.atoms[a], u);
        let mut rel = Vec::new();
        for (i, &a) in points.iter().enumerate() {
            for (j, &b) in points.iter().enumerate() {
                if i != j && members.iter().all(|u| !inside(a, u) || inside(b, u)) {
                    rel.push((i, j));
                }
            }
        }
        let labels = points
            .iter()
            .map(|&a| {
                let xs: Vec<String> = (0..carrier).filter(|&x| algebra.atoms[a][x]).map(|x| x.to_string()).collect();
                format!("<{}>", xs.join(","))
            })
            .collect();
        let poset = Arc::new(FinitePoset::new(labels, &rel)?);
        let basis: Vec<Mask> = members.iter().map(|u| points.iter().map(|&a| inside(a, u)).collect()).collect();
        let smallest = points
            .iter()
            .map(|&a| {
                let mut best: Option<usize> = None;
                for (i, u) in members.iter().enumerate() {
                    if inside(a, u) && best.map_or(true, |b| mask_subset(u, &members[b])) {
                        best = Some(i);
                    }
                }
                best.expect("points lie in some member")
            })
            .collect();
        Ok(FiniteSpectrum {
            algebra,
            members,
            points,
            poset,
            basis,
            smallest,
        })
    }

    /// The spectrum for the family of all opens of a finite poset.
    pub fn of_poset(p: &FinitePoset) -> Result<Self> {
        FiniteSpectrum::new(p.len(), p.all_opens()?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Each `Ũ` is open and is covered by the finitely many minimal basic
    /// opens of its points, so every cover has a finite subcover.
    pub fn basis_quasi_compact(&self) -> bool {
        self.basis.iter().all(|b| {
            self.poset.is_up_set(b) && {
                let mut cover = vec![false; self.len()];
                for p in self.poset.elements(b) {
                    cover = mask_union(&cover, &self.basis[self.smallest[p]]);
                }
                &cover == b
            }
        })
    }

    fn member_index(&self, u: &[bool]) -> Result<usize> {
        self.members
            .iter()
            .position(|m| m.as_slice() == u)
            .ok_or_else(|| Error::InvalidParameters("not a distinguished open".into()))
    }
}

/// A sheaf on the site of distinguished opens: a space for each member and
/// restrictions for each inclusion.
#[derive(Clone, Debug)]
pub struct SiteSheaf {
    pub field: Field,
    pub dims: Vec<usize>,
    /// `(i, j) ↦ G(U_i) → G(U_j)` for `U_j ⊆ U_i`.
    pub restrictions: HashMap<(usize, usize), Matrix>,
}

impl SiteSheaf {
    /// `U ↦ Γ(U; F)` for a sheaf on the underlying finite space.
    pub fn from_space(spec: &FiniteSpectrum, f: &CellularSheaf) -> Result<Self> {
        Self::build(spec, f.field(), |u| f.section_dim(u), |u, v| f.restriction_between(u, v))
    }

    fn build(
        spec: &FiniteSpectrum,
        field: Field,
        dim: impl Fn(&Mask) -> Result<usize>,
        res: impl Fn(&Mask, &Mask) -> Result<Matrix>,
    ) -> Result<Self> {
        let m = &spec.members;
        let dims = m.iter().map(&dim).collect::<Result<Vec<_>>>()?;
        let mut restrictions = HashMap::new();
        for i in 0..m.len() {
            for j in 0..m.len() {
                if mask_subset(&m[j], &m[i]) {
                    restrictions.insert((i, j), res(&m[i], &m[j])?);
                }
            }
        }
        Ok(SiteSheaf { field, dims, restrictions })
    }
}

/// `ζ_*H`: `U ↦ Γ(Ũ; H)`.
pub fn zeta_push(spec: &FiniteSpectrum, h: &CellularSheaf) -> Result<SiteSheaf> {
    let on_points = |u: &Mask| spec.basis[spec.member_index(u).expect("member")].clone();
    SiteSheaf::build(spec, h.field(), |u| h.section_dim(&on_points(u)), |u, v| h.restriction_between(&on_points(u), &on_points(v)))
}

/// `ζ⁻¹G`: the stalk at a point is `G` of the smallest member containing it.
pub fn zeta_pull(spec: &FiniteSpectrum, g: &SiteSheaf) -> Result<CellularSheaf> {
    let dims = spec.smallest.iter().map(|&i| g.dims[i]).collect();
    CellularSheaf::from_fn(g.field, spec.poset.clone(), dims, |p, q| g.restrictions[&(spec.smallest[p], spec.smallest[q])].clone())
}

/// Outcome of the round trips through the spectrum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTrip {
    /// `ζ⁻¹ζ_*H → H` is a natural isomorphism.
    pub pull_push: bool,
    /// `G → ζ_*ζ⁻¹G` is an isomorphism on every member and natural.
    pub push_pull: bool,
}

impl RoundTrip {
    pub fn passed(&self) -> bool {
        self.pull_push && self.push_pull
    }
}

pub fn round_trip(spec: &FiniteSpectrum, h: &CellularSheaf, g: &SiteSheaf) -> Result<RoundTrip> {
    // counit: Γ(↑p; H) → H_p
    let back = zeta_pull(spec, &zeta_push(spec, h)?)?;
    let comps = (0..spec.len())
        .map(|p| {
            let s = h.sections(&spec.basis[spec.smallest[p]])?;
            Ok(s.component(p).cloned().expect("p lies in its smallest member"))
        })
        .collect::<Result<Vec<_>>>()?;
    let pull_push = SheafMap::new(back, h.clone(), comps).map_or(false, |m| m.is_iso());

    // unit: G(U) → Γ(Ũ; ζ⁻¹G), through the stalks at the points of Ũ
    let pulled = zeta_pull(spec, g)?;
    let mut units = Vec::new();
    let mut push_pull = true;
    for (i, b) in spec.basis.iter().enumerate() {
        let s = pulled.sections(b)?;
        let to_stalks: Vec<Matrix> = s.elems.iter().map(|&p| g.restrictions[&(i, spec.smallest[p])].clone()).collect();
        let legs = Matrix::vstack(g.field, g.dims[i], &to_stalks);
        let proj: Vec<Matrix> = s.elems.iter().map(|&p| s.component(p).unwrap().clone()).collect();
        let basis = Matrix::vstack(g.field, s.dim(), &proj);
        match basis.solve(&legs) {
            Some(u) => {
                push_pull &= u.rows() == u.cols() && u.rank() == u.rows();
                units.push(u);
            }
            None => {
                push_pull = false;
                units.push(Matrix::zeros(g.field, s.dim(), g.dims[i]));
            }
        }
    }
    if push_pull {
        for (&(i, j), r) in &g.restrictions {
            let along = pulled.restriction_between(&spec.basis[i], &spec.basis[j])?;
            push_pull &= along.mul(&units[i]) == units[j].mul(r);
        }
    }
    Ok(RoundTrip { pull_push, push_pull })
}

/// A random distinguished family of a finite poset: the lattice generated by
/// some up-sets, sometimes all of them.
pub fn random_members<R: Rng>(rng: &mut R, p: &FinitePoset) -> Result<Vec<Mask>> {
    let opens = p.all_opens()?;
    if rng.gen_bool(0.3) {
        return Ok(opens);
    }
    let gens: Vec<Mask> = (0..rng.gen_range(1..=3)).map(|_| opens[rng.gen_range(0..opens.len())].clone()).collect();
    Ok(lattice_closure(p.len(), &gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{gen_finite, random_poset_sheaf, standard_shapes, FiniteShape};
    use rand::SeedableRng;

    #[test]
    fn ultrafilters_are_principal() {
        let alg = FinBoolAlg::generated_by(4, &[vec![true, true, false, false], vec![true, false, true, false]]).unwrap();
        assert_eq!(alg.atoms().len(), 4);
        let elems = alg.elements().unwrap();
        let mut found = 0;
        // every family of elements of a 2-atom algebra
        let small = FinBoolAlg::generated_by(3, &[vec![true, true, false]]).unwrap();
        let se = small.elements().unwrap();
        for bits in 0..1u32 << se.len() {
            let fam: Vec<Mask> = (0..se.len()).filter(|i| bits >> i & 1 == 1).map(|i| se[i].clone()).collect();
            if ultrafilter_validate(&small, &fam).unwrap() {
                found += 1;
                assert!((0..2).any(|a| small.principal(a).unwrap().len() == fam.len() && small.principal(a).unwrap().iter().all(|s| fam.contains(s))));
            }
        }
        assert_eq!(found, 2);
        for a in 0..4 {
            assert!(ultrafilter_validate(&alg, &alg.principal(a).unwrap()).unwrap());
        }
        let no_top: Vec<Mask> = alg.principal(0).unwrap().into_iter().filter(|s| s.iter().any(|b| !b)).collect();
        assert!(!ultrafilter_validate(&alg, &no_top).unwrap());
        let mut both = alg.principal(0).unwrap();
        both.push(alg.complement(&elems[1]));
        both.push(elems[1].clone());
        assert!(!ultrafilter_validate(&alg, &both).unwrap());
    }

    #[test]
    fn small_spectra() {
        let d = gen_finite(&FiniteShape::Discrete(3)).unwrap();
        assert_eq!(FiniteSpectrum::of_poset(&d).unwrap().len(), 3);
        let s = FiniteSpectrum::new(2, vec![vec![false, false], vec![true, false], vec![true, true]]).unwrap();
        assert_eq!(s.len(), 2);
        let a = s.basis[1].clone();
        assert_eq!(a.iter().filter(|&&b| b).count(), 1);
        assert_eq!(s.algebra.atoms()[s.points[a.iter().position(|&b| b).unwrap()]], vec![true, false]);
        assert!(s.basis_quasi_compact());
        assert!(FiniteSpectrum::new(3, vec![vec![false; 3]]).unwrap().is_empty());
        assert!(FiniteSpectrum::new(2, vec![vec![true, false], vec![false, true]]).is_err());
    }

    #[test]
    fn round_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for shape in standard_shapes() {
            let p = Arc::new(gen_finite(&shape).unwrap());
            for _ in 0..4 {
                let spec = FiniteSpectrum::new(p.len(), random_members(&mut rng, &p).unwrap()).unwrap();
                let h = random_poset_sheaf(&mut rng, Field::Rational, &spec.poset.clone(), 3).unwrap();
                let f = random_poset_sheaf(&mut rng, Field::Rational, &p, 3).unwrap();
                let g = SiteSheaf::from_space(&spec, &f).unwrap();
                let r = round_trip(&spec, &h, &g).unwrap();
                assert!(r.passed(), "{shape}: {r:?}");
            }
        }
    }
}
