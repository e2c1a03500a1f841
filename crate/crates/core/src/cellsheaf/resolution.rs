use std::sync::Arc;

use super::poset::FinitePoset;
use super::sheaf::{CellularSheaf, SheafMap};
use crate::error::{Error, Result};
use crate::exactla::{Field, Matrix};

/// `⊕_p J_p^{m_p}`, where `J_p` is `k` on the down-set of `p` with identity maps.
/// The stalk at `q` is `⊕_{p ≥ q} k^{m_p}`, summands in increasing order of `p`.
pub fn injective_sum(field: Field, poset: Arc<FinitePoset>, mult: &[usize]) -> CellularSheaf {
    let n = poset.len();
    let layout = |q: usize| -> Vec<(usize, usize)> {
        // (p, offset) for each summand at q
        let mut off = 0;
        let mut out = Vec::new();
        for p in 0..n {
            if poset.leq(q, p) && mult[p] > 0 {
                out.push((p, off));
                off += mult[p];
            }
        }
        out
    };
    let dims: Vec<usize> = (0..n)
        .map(|q| (0..n).filter(|&p| poset.leq(q, p)).map(|p| mult[p]).sum())
        .collect();
    let maps = poset
        .hasse()
        .iter()
        .map(|&(a, b)| {
            let mut m = Matrix::zeros(field, dims[b], dims[a]);
            let la = layout(a);
            for (p, ob) in layout(b) {
                let oa = la.iter().find(|(x, _)| *x == p).unwrap().1;
                m.set_block(ob, oa, &Matrix::identity(field, mult[p]));
            }
            m
        })
        .collect();
    CellularSheaf::new_unchecked(field, poset, dims, maps).expect("shapes agree by construction")
}

pub fn elementary_injective(field: Field, poset: Arc<FinitePoset>, p: usize) -> CellularSheaf {
    let mut mult = vec![0; poset.len()];
    mult[p] = 1;
    injective_sum(field, poset, &mult)
}

/// Rows of the summand `J_p` inside the stalk of an injective sum at `q`.
fn summand_rows(poset: &FinitePoset, mult: &[usize], q: usize, p: usize) -> Option<usize> {
    if !poset.leq(q, p) || mult[p] == 0 {
        return None;
    }
    Some((0..p).filter(|&r| poset.leq(q, r)).map(|r| mult[r]).sum())
}

/// Elements of `F_p` killed by every generization leaving `p`.
pub fn socle(f: &CellularSheaf, p: usize) -> Matrix {
    let field = f.field();
    let ups = f.poset().covers_above(p);
    let rows: Vec<Matrix> = ups.iter().map(|&q| f.edge_map(p, q).clone()).collect();
    let stacked = Matrix::vstack(field, f.dim(p), &rows);
    stacked.kernel_basis()
}

/// The injective hull `F ↪ ⊕ J_p^{m_p}` with `m_p = dim` of the socle at `p`.
pub fn injective_hull(f: &CellularSheaf) -> (Vec<usize>, SheafMap) {
    let field = f.field();
    let poset = f.poset().clone();
    let n = poset.len();
    let socles: Vec<Matrix> = (0..n).map(|p| socle(f, p)).collect();
    let mult: Vec<usize> = socles.iter().map(Matrix::cols).collect();
    let retractions: Vec<Matrix> = socles
        .iter()
        .map(|s| s.left_inverse().expect("a kernel basis is injective"))
        .collect();
    let target = injective_sum(field, poset.clone(), &mult);
    let comps = (0..n)
        .map(|q| {
            let blocks: Vec<Matrix> = (0..n)
                .filter(|&p| poset.leq(q, p) && mult[p] > 0)
                .map(|p| retractions[p].mul(&f.map(q, p)))
                .collect();
            Matrix::vstack(field, f.dim(q), &blocks)
        })
        .collect();
    let iota = SheafMap::new_unchecked(f.clone(), target, comps).expect("shapes agree by construction");
    (mult, iota)
}

/// A minimal injective resolution `0 → F → I⁰ → I¹ → …`.
#[derive(Clone, Debug)]
pub struct InjectiveResolution {
    pub multiplicities: Vec<Vec<usize>>,
    pub terms: Vec<CellularSheaf>,
    pub coaugmentation: SheafMap,
    pub differentials: Vec<SheafMap>,
}

impl InjectiveResolution {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Pointwise exactness of `0 → F → I⁰ → I¹ → … → Iⁿ → 0`.
    pub fn check_exact(&self) -> bool {
        let f = &self.coaugmentation.source;
        let n = f.poset().len();
        if !self.coaugmentation.is_mono() {
            return false;
        }
        let mut incoming: Vec<Matrix> = self.coaugmentation.comps.clone();
        for (k, term) in self.terms.iter().enumerate() {
            let outgoing: Vec<Matrix> = match self.differentials.get(k) {
                Some(d) => d.comps.clone(),
                None => (0..n).map(|p| Matrix::zeros(f.field(), 0, term.dim(p))).collect(),
            };
            for p in 0..n {
                let composite_zero = outgoing[p].mul(&incoming[p]).is_zero();
                let ranks_match = incoming[p].rank() + outgoing[p].rank() == term.dim(p);
                if !(composite_zero && ranks_match) {
                    return false;
                }
            }
            incoming = outgoing;
        }
        true
    }
}

/// Builds the minimal injective resolution, stopping when the cokernel vanishes.
/// Fails if more than `max_terms` terms would be needed.
pub fn injective_resolution(f: &CellularSheaf, max_terms: usize) -> Result<InjectiveResolution> {
    let mut multiplicities = Vec::new();
    let mut terms = Vec::new();
    let mut differentials = Vec::new();
    let (m0, iota0) = injective_hull(f);
    let coaugmentation = iota0.clone();
    let mut current = iota0;
    multiplicities.push(m0);
    terms.push(current.target.clone());
    loop {
        let proj = current.cokernel();
        if proj.target.is_zero() {
            break;
        }
        if terms.len() >= max_terms {
            return Err(Error::InvalidParameters(format!(
                "injective resolution needs more than {max_terms} terms"
            )));
        }
        let (m, iota) = injective_hull(&proj.target);
        differentials.push(iota.after(&proj)?);
        multiplicities.push(m);
        terms.push(iota.target.clone());
        current = SheafMap::new_unchecked(
            differentials.last().unwrap().source.clone(),
            iota.target.clone(),
            differentials.last().unwrap().comps.clone(),
        )?;
    }
    if f.is_zero() {
        return Ok(InjectiveResolution {
            multiplicities: vec![],
            terms: vec![],
            coaugmentation,
            differentials: vec![],
        });
    }
    Ok(InjectiveResolution {
        multiplicities,
        terms,
        coaugmentation,
        differentials,
    })
}

/// `Hom(F, ⊕ J_p^{m_p}) ≅ ⊕_p Hom(F_p, k^{m_p})`: coordinates are the blocks `ψ_p`.
fn hom_into_injective_dim(f: &CellularSheaf, mult: &[usize]) -> usize {
    (0..mult.len()).map(|p| mult[p] * f.dim(p)).sum()
}

/// The matrix of `ψ ↦ d ∘ ψ` in the block coordinates of [`hom_into_injective_dim`].
fn hom_into_injective_map(f: &CellularSheaf, src: &[usize], dst: &[usize], d: &SheafMap) -> Matrix {
    let field = f.field();
    let poset = f.poset();
    let n = poset.len();
    let offs = |mult: &[usize]| -> Vec<usize> {
        let mut acc = 0;
        (0..n)
            .map(|p| {
                let o = acc;
                acc += mult[p] * f.dim(p);
                o
            })
            .collect()
    };
    let (so, to) = (offs(src), offs(dst));
    let cols = hom_into_injective_dim(f, src);
    let rows = hom_into_injective_dim(f, dst);
    let mut out = Matrix::zeros(field, rows, cols);
    for p in 0..n {
        for i in 0..src[p] {
            for j in 0..f.dim(p) {
                let col = so[p] + i * f.dim(p) + j;
                // ψ has a single nonzero entry: row i, column j of the block at p
                for r in 0..n {
                    if dst[r] == 0 || !poset.leq(r, p) {
                        continue;
                    }
                    // φ_r = ψ_p F(r,p) sits in the summand p of the stalk at r
                    let row_p = summand_rows(poset, src, r, p).unwrap() + i;
                    let frp = f.map(r, p);
                    let block_r = summand_rows(poset, dst, r, r).unwrap();
                    for a in 0..dst[r] {
                        let coeff = d.comps[r].get(block_r + a, row_p);
                        if coeff.is_zero() {
                            continue;
                        }
                        for b in 0..f.dim(r) {
                            let e = frp.get(j, b);
                            if e.is_zero() {
                                continue;
                            }
                            let row = to[r] + a * f.dim(r) + b;
                            out.set(row, col, out.get(row, col) + &(coeff * e));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Dimensions of `Extⁿ(F, G)` for `n = 0..=max_degree`, from the minimal
/// injective resolution of `G`.
pub fn ext_dims(f: &CellularSheaf, g: &CellularSheaf, max_degree: usize) -> Result<Vec<usize>> {
    f.same_base(g)?;
    let res = injective_resolution(g, f.poset().len() + 2)?;
    let k = res.terms.len();
    let dims: Vec<usize> = res.multiplicities.iter().map(|m| hom_into_injective_dim(f, m)).collect();
    let ranks: Vec<usize> = (0..k.saturating_sub(1))
        .map(|i| hom_into_injective_map(f, &res.multiplicities[i], &res.multiplicities[i + 1], &res.differentials[i]).rank())
        .collect();
    Ok((0..=max_degree)
        .map(|n| {
            if n >= k {
                return 0;
            }
            let out_rank = ranks.get(n).copied().unwrap_or(0);
            let in_rank = if n == 0 { 0 } else { ranks[n - 1] };
            dims[n] - out_rank - in_rank
        })
        .collect())
}

pub fn ext_dim(f: &CellularSheaf, g: &CellularSheaf, n: usize) -> Result<usize> {
    Ok(ext_dims(f, g, n)?[n])
}

#[cfg(test)]
mod tests {
    use super::super::sheaf::hom_space;
    use super::*;

    const Q: Field = Field::Rational;

    fn chain2() -> Arc<FinitePoset> {
        Arc::new(FinitePoset::with_indices(2, &[(0, 1)]).unwrap())
    }

    #[test]
    fn elementary_injective_shape() {
        let p = chain2();
        let j0 = elementary_injective(Q, p.clone(), 0);
        assert_eq!(j0.dims(), &[1, 0]);
        let j1 = elementary_injective(Q, p.clone(), 1);
        assert_eq!(j1.dims(), &[1, 1]);
    }

    #[test]
    fn skyscraper_is_its_own_resolution() {
        let p = chain2();
        let j1 = elementary_injective(Q, p, 1);
        let r = injective_resolution(&j1, 4).unwrap();
        assert_eq!(r.terms.len(), 1);
        assert!(r.differentials.is_empty());
        assert!(r.check_exact());
    }

    #[test]
    fn constant_on_chain() {
        let p = chain2();
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        let r = injective_resolution(&k, 4).unwrap();
        assert!(r.check_exact());
        // the constant sheaf on a chain is J of the top element
        assert_eq!(r.multiplicities, vec![vec![0, 1]]);
        let low = CellularSheaf::constant(Q, p, &[false, true]).unwrap();
        let r = injective_resolution(&low, 4).unwrap();
        assert!(r.check_exact());
        assert_eq!(r.terms.len(), 2);
    }

    #[test]
    fn zero_sheaf_has_empty_resolution() {
        let p = chain2();
        let r = injective_resolution(&CellularSheaf::zero(Q, p), 4).unwrap();
        assert!(r.terms.is_empty());
    }

    #[test]
    fn ext_zero_is_hom() {
        let p = Arc::new(FinitePoset::with_indices(3, &[(0, 1), (0, 2)]).unwrap());
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        let a = CellularSheaf::constant(Q, p.clone(), &[false, true, false]).unwrap();
        for (x, y) in [(&k, &a), (&a, &k), (&k, &k)] {
            assert_eq!(ext_dim(x, y, 0).unwrap(), hom_space(x, y).unwrap().dim());
        }
    }

    #[test]
    fn ext_into_injective_vanishes() {
        let p = Arc::new(FinitePoset::with_indices(3, &[(0, 1), (0, 2)]).unwrap());
        let k = CellularSheaf::constant(Q, p.clone(), &p.full()).unwrap();
        let j = elementary_injective(Q, p, 1);
        assert_eq!(ext_dim(&k, &j, 1).unwrap(), 0);
    }
}
