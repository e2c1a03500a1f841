use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ConstructibleTSheaf;
use crate::error::Result;
use crate::exactla::{Field, Matrix};
use crate::lineorder::{int, rat, Rat, SemilinearOpen, SemilinearSet};

/// A presheaf on the T-site, given by its section spaces in fixed bases.
pub trait TPresheaf {
    fn field(&self) -> Field;
    /// Points where the data changes; random opens are built around them.
    fn landmarks(&self) -> Vec<Rat>;
    fn value_dim(&self, u: &SemilinearOpen) -> Result<usize>;
    /// `F(V) → F(U)` for `U ⊆ V`.
    fn restrict(&self, v: &SemilinearOpen, u: &SemilinearOpen) -> Result<Matrix>;
}

impl TPresheaf for ConstructibleTSheaf {
    fn field(&self) -> Field {
        ConstructibleTSheaf::field(self)
    }

    fn landmarks(&self) -> Vec<Rat> {
        self.endpoints().to_vec()
    }

    fn value_dim(&self, u: &SemilinearOpen) -> Result<usize> {
        self.section_dim(u)
    }

    fn restrict(&self, v: &SemilinearOpen, u: &SemilinearOpen) -> Result<Matrix> {
        self.restriction(v, u)
    }
}

/// `U ↦ k` for every nonempty `U`, with identity restrictions: separated
/// only on connected opens, so not a sheaf.
#[derive(Clone, Copy, Debug)]
pub struct ConstantPresheaf(pub Field);

impl TPresheaf for ConstantPresheaf {
    fn field(&self) -> Field {
        self.0
    }

    fn landmarks(&self) -> Vec<Rat> {
        vec![int(0), int(1)]
    }

    fn value_dim(&self, u: &SemilinearOpen) -> Result<usize> {
        Ok(!u.is_empty() as usize)
    }

    fn restrict(&self, v: &SemilinearOpen, u: &SemilinearOpen) -> Result<Matrix> {
        let (r, c) = (self.value_dim(u)?, self.value_dim(v)?);
        Ok(if r == 1 && c == 1 {
            Matrix::identity(self.0, 1)
        } else {
            Matrix::zeros(self.0, r, c)
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GluingReport {
    pub empty_is_zero: bool,
    pub pairs_checked: usize,
    pub coverings_checked: usize,
    /// Opens on which the sheaf condition failed.
    pub failures: Vec<Vec<String>>,
}

impl GluingReport {
    pub fn passed(&self) -> bool {
        self.empty_is_zero && self.failures.is_empty()
    }
}

/// A random bounded open whose endpoints come from the landmarks and a grid of halves.
pub(crate) fn random_open<R: Rng>(rng: &mut R, landmarks: &[Rat]) -> SemilinearOpen {
    let mut pool: Vec<Rat> = landmarks.to_vec();
    let (lo, hi) = match (landmarks.iter().min(), landmarks.iter().max()) {
        (Some(a), Some(b)) => (a.floor().to_integer(), b.ceil().to_integer()),
        _ => (0.into(), 1.into()),
    };
    let (lo, hi): (i64, i64) = (i64::try_from(lo).unwrap_or(0) - 1, i64::try_from(hi).unwrap_or(1) + 1);
    for k in 2 * lo..=2 * hi {
        pool.push(rat(k, 2));
    }
    pool.sort();
    pool.dedup();
    let pieces = rng.gen_range(1..=2);
    let mut pts: Vec<Rat> = pool.choose_multiple(rng, 2 * pieces).cloned().collect();
    pts.sort();
    let mut set = SemilinearSet::empty();
    for pair in pts.chunks(2) {
        if pair.len() == 2 && pair[0] < pair[1] {
            set = set.union(&SemilinearSet::open_q(pair[0].clone(), pair[1].clone()));
        }
    }
    SemilinearOpen::new(set).expect("union of open intervals")
}

/// Exactness of `0 → F(W) → ⊕ F(U_i) → ⊕_{i<j} F(U_i ∩ U_j)` for `W = ⋃ U_i`.
pub fn covering_exact<P: TPresheaf + ?Sized>(p: &P, cover: &[SemilinearOpen]) -> Result<bool> {
    let field = p.field();
    let w = cover.iter().fold(SemilinearOpen::empty(), |a, u| a.union(u));
    let dw = p.value_dim(&w)?;
    let dims: Vec<usize> = cover.iter().map(|u| p.value_dim(u)).collect::<Result<_>>()?;
    let total: usize = dims.iter().sum();
    let first = Matrix::vstack(field, dw, &cover.iter().map(|u| p.restrict(&w, u)).collect::<Result<Vec<_>>>()?);
    let mut rows = Vec::new();
    for i in 0..cover.len() {
        for j in i + 1..cover.len() {
            let uij = cover[i].intersect(&cover[j]);
            let dij = p.value_dim(&uij)?;
            let mut blocks: Vec<Matrix> = dims.iter().map(|&d| Matrix::zeros(field, dij, d)).collect();
            blocks[i] = p.restrict(&cover[i], &uij)?;
            blocks[j] = p.restrict(&cover[j], &uij)?.neg();
            rows.push(Matrix::hstack(field, dij, &blocks));
        }
    }
    let second = Matrix::vstack(field, total, &rows);
    let injective = first.rank() == dw;
    let complex = second.mul(&first).is_zero();
    let exact_middle = first.rank() + second.rank() == total;
    Ok(injective && complex && exact_middle)
}

/// Checks `F(∅) = 0` and two-open gluing on `budget` random pairs, then the
/// full finite-covering condition on random three-member coverings.
pub fn sheaf_axioms_check<P: TPresheaf + ?Sized>(p: &P, budget: usize, seed: u64) -> Result<GluingReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let marks = p.landmarks();
    let mut rep = GluingReport {
        empty_is_zero: p.value_dim(&SemilinearOpen::empty())? == 0,
        ..Default::default()
    };
    for _ in 0..budget {
        let u = random_open(&mut rng, &marks);
        let v = random_open(&mut rng, &marks);
        rep.pairs_checked += 1;
        if !covering_exact(p, &[u.clone(), v.clone()])? {
            rep.failures.push(vec![u.to_string(), v.to_string()]);
        }
    }
    for _ in 0..budget.div_ceil(4) {
        let cover: Vec<SemilinearOpen> = (0..3).map(|_| random_open(&mut rng, &marks)).collect();
        rep.coverings_checked += 1;
        if !covering_exact(p, &cover)? {
            rep.failures.push(cover.iter().map(|u| u.to_string()).collect());
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rational;

    #[test]
    fn constant_sheaf_passes() {
        let f = ConstructibleTSheaf::constant(Q, &SemilinearSet::parse("(0,1)").unwrap());
        assert!(sheaf_axioms_check(&f, 30, 1).unwrap().passed());
        let g = f.direct_sum(&ConstructibleTSheaf::constant(Q, &SemilinearSet::parse("[1,2]").unwrap())).unwrap();
        assert!(sheaf_axioms_check(&g, 30, 2).unwrap().passed());
    }

    #[test]
    fn constant_presheaf_is_rejected() {
        let rep = sheaf_axioms_check(&ConstantPresheaf(Q), 40, 3).unwrap();
        assert!(!rep.passed());
        assert!(!rep.failures.is_empty());
    }
}
