use std::collections::HashMap;
use std::sync::Arc;

use super::poset::{mask_intersect, mask_subset, FinitePoset, Mask};
use super::sheaf::{CellularSheaf, Sections};
use crate::error::{Error, Result};
use crate::exactla::{Field, FinDiagram, Limit, Matrix};

/// A presheaf on a finite poset, stored open-wise: a space for every up-set
/// and a restriction for every removal of one minimal element. Restrictions
/// between arbitrary nested opens are composites of these.
#[derive(Clone, Debug)]
pub struct Presheaf {
    field: Field,
    poset: Arc<FinitePoset>,
    opens: Vec<Mask>,
    index: HashMap<Mask, usize>,
    dims: Vec<usize>,
    steps: HashMap<(usize, usize), Matrix>,
}

/// Key of an object in the diagram of matching families over the principal covering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyKey {
    Principal(usize),
    Overlap(usize, usize),
}

struct Families {
    keys: Vec<FamilyKey>,
    limit: Limit,
}

impl Families {
    fn projection(&self, k: FamilyKey) -> &Matrix {
        let i = self.keys.iter().position(|&x| x == k).expect("key in diagram");
        &self.limit.projections[i]
    }
}

impl Presheaf {
    /// Builds a presheaf from a dimension per open and the elementary
    /// restriction `P(U) → P(U ∖ {x})` for `x` minimal in `U`.
    pub fn from_fn(
        field: Field,
        poset: Arc<FinitePoset>,
        mut dim: impl FnMut(&Mask) -> usize,
        mut step: impl FnMut(&Mask, usize, usize, usize) -> Matrix,
    ) -> Result<Self> {
        let opens = poset.all_opens()?;
        let index: HashMap<Mask, usize> = opens.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let dims: Vec<usize> = opens.iter().map(&mut dim).collect();
        let mut steps = HashMap::new();
        for (ui, u) in opens.iter().enumerate() {
            for x in poset.minimal(u) {
                let mut v = u.clone();
                v[x] = false;
                let vi = index[&v];
                let m = step(u, x, dims[ui], dims[vi]);
                if m.shape() != (dims[vi], dims[ui]) {
                    return Err(Error::Shape("restriction has the wrong shape".into()));
                }
                steps.insert((ui, x), m);
            }
        }
        let p = Presheaf {
            field,
            poset,
            opens,
            index,
            dims,
            steps,
        };
        p.check_functorial()?;
        Ok(p)
    }

    /// The presheaf of sections of a sheaf.
    pub fn of_sheaf(f: &CellularSheaf) -> Result<Self> {
        let poset = f.poset().clone();
        let opens = poset.all_opens()?;
        let secs: HashMap<Mask, Sections> = opens.iter().map(|u| (u.clone(), f.sections_unchecked(u))).collect();
        Presheaf::from_fn(
            f.field(),
            poset,
            |u| secs[u].dim(),
            |u, x, _, _| {
                let mut v = u.clone();
                v[x] = false;
                f.restriction(&secs[u], &secs[&v]).expect("nested opens")
            },
        )
    }

    /// `k` on every nonempty open with identity restrictions; on the empty open
    /// the value is `k` (identity restrictions) or `0`.
    pub fn constant(field: Field, poset: Arc<FinitePoset>, value_on_empty: bool) -> Result<Self> {
        let d = |u: &Mask| {
            if u.iter().any(|&b| b) || value_on_empty {
                1
            } else {
                0
            }
        };
        Presheaf::from_fn(field, poset, d, |_, _, a, b| {
            if a == b {
                Matrix::identity(field, a)
            } else {
                Matrix::zeros(field, b, a)
            }
        })
    }

    /// Values `k^{d(U)}` with every proper restriction zero.
    pub fn junk(field: Field, poset: Arc<FinitePoset>, dim: impl FnMut(&Mask) -> usize) -> Result<Self> {
        Presheaf::from_fn(field, poset, dim, |_, _, a, b| Matrix::zeros(field, b, a))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn poset(&self) -> &Arc<FinitePoset> {
        &self.poset
    }

    pub fn opens(&self) -> &[Mask] {
        &self.opens
    }

    pub fn open_index(&self, u: &[bool]) -> Result<usize> {
        self.index
            .get(u)
            .copied()
            .ok_or_else(|| Error::NotOpen(format!("{:?}", self.poset.describe(u))))
    }

    pub fn dim(&self, u: &[bool]) -> Result<usize> {
        Ok(self.dims[self.open_index(u)?])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Restriction `P(U) → P(V)` for opens `V ⊆ U`.
    pub fn restrict(&self, u: &[bool], v: &[bool]) -> Result<Matrix> {
        if !mask_subset(v, u) {
            return Err(Error::Shape("restriction to a non-subset".into()));
        }
        let mut cur: Mask = u.to_vec();
        let mut acc = Matrix::identity(self.field, self.dim(u)?);
        while cur.as_slice() != v {
            let ui = self.open_index(&cur)?;
            let x = self
                .poset
                .minimal(&cur)
                .into_iter()
                .find(|&x| !v[x])
                .expect("some minimal element lies outside V");
            acc = self.steps[&(ui, x)].mul(&acc);
            cur[x] = false;
        }
        Ok(acc)
    }

    /// Removing two minimal elements in either order gives the same restriction.
    pub fn check_functorial(&self) -> Result<()> {
        for (ui, u) in self.opens.iter().enumerate() {
            let mins = self.poset.minimal(u);
            for (a, &x) in mins.iter().enumerate() {
                for &y in &mins[a + 1..] {
                    let mut ux = u.clone();
                    ux[x] = false;
                    let mut uy = u.clone();
                    uy[y] = false;
                    let (uxi, uyi) = (self.index[&ux], self.index[&uy]);
                    let via_x = self.steps[&(uxi, y)].mul(&self.steps[&(ui, x)]);
                    let via_y = self.steps[&(uyi, x)].mul(&self.steps[&(ui, y)]);
                    if via_x != via_y {
                        return Err(Error::NotFunctorial(format!(
                            "restrictions from {:?} disagree",
                            self.poset.describe(u)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Matching families over `{↑p : p ∈ U}`, which refines every covering of `U`.
    fn families(&self, u: &[bool]) -> Families {
        let pts = self.poset.elements(u);
        let mut keys = Vec::new();
        let mut objs: Vec<Mask> = Vec::new();
        for &p in &pts {
            keys.push(FamilyKey::Principal(p));
            objs.push(self.poset.up(p));
        }
        for (i, &p) in pts.iter().enumerate() {
            for &q in &pts[i + 1..] {
                keys.push(FamilyKey::Overlap(p, q));
                objs.push(mask_intersect(&self.poset.up(p), &self.poset.up(q)));
            }
        }
        let mut d = FinDiagram::new(self.field, objs.iter().map(|o| self.dim(o).unwrap()).collect());
        for (k, key) in keys.iter().enumerate() {
            if let FamilyKey::Overlap(p, q) = *key {
                for (src, pt) in [(pts.iter().position(|&r| r == p).unwrap(), p), (pts.iter().position(|&r| r == q).unwrap(), q)] {
                    let m = self.restrict(&self.poset.up(pt), &objs[k]).unwrap();
                    d.arrows.push((src, k, m));
                }
            }
        }
        Families {
            keys,
            limit: d.limit().expect("restriction shapes are consistent"),
        }
    }

    /// The plus construction: `P⁺(U)` is the space of matching families over
    /// the principal covering of `U`; restrictions forget members.
    pub fn plus(&self) -> Result<Presheaf> {
        let fams: Vec<Families> = self.opens.iter().map(|u| self.families(u)).collect();
        let index = &self.index;
        Presheaf::from_fn(
            self.field,
            self.poset.clone(),
            |u| fams[index[u]].limit.dim,
            |u, x, _, dv| {
                let mut v = u.clone();
                v[x] = false;
                let (fu, fv) = (&fams[index[u]], &fams[index[&v]]);
                if fv.keys.is_empty() {
                    return Matrix::zeros(self.field, dv, fu.limit.dim);
                }
                let legs: Vec<Matrix> = fv.keys.iter().map(|&k| fu.projection(k).clone()).collect();
                fv.limit.factor_cone(&legs).expect("forgetting members gives a cone")
            },
        )
    }

    /// The canonical map `P(U) → P⁺(U)` for every open, in the order of [`Presheaf::opens`].
    pub fn unit(&self) -> Vec<Matrix> {
        self.opens
            .iter()
            .map(|u| {
                let fam = self.families(u);
                if fam.keys.is_empty() {
                    return Matrix::zeros(self.field, 0, self.dim(u).unwrap());
                }
                let legs: Vec<Matrix> = fam
                    .keys
                    .iter()
                    .map(|&k| {
                        let target = match k {
                            FamilyKey::Principal(p) => self.poset.up(p),
                            FamilyKey::Overlap(p, q) => mask_intersect(&self.poset.up(p), &self.poset.up(q)),
                        };
                        self.restrict(u, &target).unwrap()
                    })
                    .collect();
                fam.limit.factor_cone(&legs).expect("restrictions form a cone")
            })
            .collect()
    }

    pub fn sheafify(&self) -> Result<Presheaf> {
        self.plus()?.plus()
    }

    pub fn is_separated(&self) -> bool {
        self.unit().iter().all(Matrix::is_injective)
    }

    pub fn is_sheaf(&self) -> bool {
        self.unit().iter().all(|m| m.is_injective() && m.is_surjective())
    }

    /// The composite unit `P → P⁺ → P⁺⁺`.
    pub fn unit_to_sheafification(&self) -> Result<(Presheaf, Vec<Matrix>)> {
        let p1 = self.plus()?;
        let u1 = self.unit();
        let u2 = p1.unit();
        let p2 = p1.plus()?;
        let comp = u2.iter().zip(&u1).map(|(b, a)| b.mul(a)).collect();
        Ok((p2, comp))
    }

    /// Reads a sheaf back as a functor: stalk `P(↑p)`, generization maps the restrictions.
    pub fn to_cellular(&self) -> Result<CellularSheaf> {
        let poset = self.poset.clone();
        let dims = (0..poset.len()).map(|p| self.dim(&poset.up(p)).unwrap()).collect();
        CellularSheaf::from_fn(self.field, poset.clone(), dims, |p, q| {
            self.restrict(&poset.up(p), &poset.up(q)).unwrap()
        })
    }

    pub fn direct_sum(&self, other: &Presheaf) -> Result<Presheaf> {
        if self.poset != other.poset || self.field != other.field {
            return Err(Error::Shape("presheaves on different bases".into()));
        }
        let index = &self.index;
        Presheaf::from_fn(
            self.field,
            self.poset.clone(),
            |u| self.dims[index[u]] + other.dims[index[u]],
            |u, x, _, _| {
                let k = (index[u], x);
                Matrix::block_diag(self.field, &[self.steps[&k].clone(), other.steps[&k].clone()])
            },
        )
    }

    /// Builds a presheaf from values and elementary restrictions given as closures over open indices.
    pub fn with_steps(
        field: Field,
        poset: Arc<FinitePoset>,
        dims: Vec<usize>,
        step: impl Fn(usize, usize) -> Matrix,
    ) -> Result<Presheaf> {
        let opens = poset.all_opens()?;
        if dims.len() != opens.len() {
            return Err(Error::Shape("one dimension per open expected".into()));
        }
        let index: HashMap<Mask, usize> = opens.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Presheaf::from_fn(field, poset, |u| dims[index[u]], |u, x, _, _| step(index[u], x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rational;

    fn discrete2() -> Arc<FinitePoset> {
        Arc::new(FinitePoset::with_indices(2, &[]).unwrap())
    }

    #[test]
    fn product_example() {
        // P(X) = k², P({a}) = P({b}) = k, zero restrictions
        let p = discrete2();
        let pre = Presheaf::from_fn(
            Q,
            p.clone(),
            |u| match u.iter().filter(|&&b| b).count() {
                2 => 2,
                1 => 1,
                _ => 0,
            },
            |_, _, a, b| Matrix::zeros(Q, b, a),
        )
        .unwrap();
        let plus = pre.plus().unwrap();
        assert_eq!(plus.dim(&[true, true]).unwrap(), 2);
        let sh = pre.sheafify().unwrap();
        assert!(sh.is_sheaf());
        assert_eq!(sh.dim(&[true, true]).unwrap(), 2);
        assert!(!pre.is_separated());
    }

    #[test]
    fn empty_covering_kills_the_empty_open() {
        let p = discrete2();
        let pre = Presheaf::constant(Q, p, true).unwrap();
        assert_eq!(pre.dim(&[false, false]).unwrap(), 1);
        let plus = pre.plus().unwrap();
        assert_eq!(plus.dim(&[false, false]).unwrap(), 0);
        // with P(∅) = k matching families on {a},{b} must agree: not yet a sheaf
        assert_eq!(plus.dim(&[true, true]).unwrap(), 1);
        assert_eq!(pre.sheafify().unwrap().dim(&[true, true]).unwrap(), 2);
    }

    #[test]
    fn sheaves_are_fixed() {
        let p = Arc::new(FinitePoset::with_indices(3, &[(0, 1), (0, 2)]).unwrap());
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        let pre = Presheaf::of_sheaf(&k).unwrap();
        assert!(pre.is_sheaf());
        let (pp, unit) = pre.unit_to_sheafification().unwrap();
        assert!(unit.iter().all(|m| m.inverse().is_some()));
        assert_eq!(pp.to_cellular().unwrap().dims(), k.dims());
    }

    #[test]
    fn separated_but_not_sheaf() {
        let p = discrete2();
        let pre = Presheaf::constant(Q, p, false).unwrap();
        assert!(pre.is_separated());
        assert!(!pre.is_sheaf());
    }
}
