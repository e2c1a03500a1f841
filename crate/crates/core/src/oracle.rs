//! Slow reference computations that share no code path with the main
//! algorithms: exhaustive searches and direct linear-algebra descriptions.
//! Only meant for small inputs.

use crate::cellsheaf::{mask_intersect, mask_subset, CellularSheaf, FinitePoset, Mask, Presheaf};
use crate::error::{Error, Result};
use crate::exactla::{Field, FinDiagram, Matrix, Scalar};
use crate::lineorder::{Rat, SemilinearOpen};
use crate::tsheaf::ConstructibleTSheaf;

/// Matrix of the linear map `X ↦ f(X)` on `rows × cols` matrices, with
/// matrices flattened row by row.
fn linear_map(field: Field, rows: usize, cols: usize, out: (usize, usize), f: impl Fn(&Matrix) -> Matrix) -> Matrix {
    let mut m = Matrix::zeros(field, out.0 * out.1, rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut e = Matrix::zeros(field, rows, cols);
            e.set(i, j, field.one());
            let y = f(&e);
            for a in 0..out.0 {
                for b in 0..out.1 {
                    m.set(a * out.1 + b, i * cols + j, y.get(a, b).clone());
                }
            }
        }
    }
    m
}

/// Every restriction between nested opens is onto.
pub fn flabby_by_all_pairs(f: &CellularSheaf) -> Result<bool> {
    let opens = f.poset().all_opens()?;
    for v in &opens {
        for u in &opens {
            if mask_subset(u, v) && !f.restriction_between(v, u)?.is_surjective() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Flabbiness on the line by every pair `U ⊆ V` of unions of at most two
/// intervals with endpoints among the endpoints of `f`, midpoints of its
/// edges and two points beyond each end.
pub fn flabby_by_interval_pairs(f: &ConstructibleTSheaf) -> Result<bool> {
    let e = f.endpoints();
    let mut pts: Vec<Rat> = e.to_vec();
    for w in e.windows(2) {
        pts.push((&w[0] + &w[1]) / Rat::from_integer(2.into()));
    }
    match (e.first(), e.last()) {
        (Some(a), Some(b)) => {
            for d in [1, 2] {
                pts.push(a - Rat::from_integer(d.into()));
                pts.push(b + Rat::from_integer(d.into()));
            }
        }
        _ => pts.extend((0..3).map(|n| Rat::from_integer(n.into()))),
    }
    pts.sort();
    let mut intervals = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            intervals.push((i, j));
        }
    }
    let open = |&(i, j): &(usize, usize)| SemilinearOpen::open_q(pts[i].clone(), pts[j].clone());
    let mut family: Vec<SemilinearOpen> = intervals.iter().map(open).collect();
    for (a, x) in intervals.iter().enumerate() {
        for y in &intervals[a + 1..] {
            if x.1 <= y.0 {
                family.push(open(x).union(&open(y)));
            }
        }
    }
    for v in &family {
        for u in &family {
            if u.is_subset(v) && !f.restriction(v, u)?.is_surjective() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Hasse paths from `p` to `r`.
fn paths(poset: &FinitePoset, p: usize, r: usize) -> Vec<Vec<(usize, usize)>> {
    if p == r {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for &q in poset.covers_above(p) {
        if poset.leq(q, r) {
            for mut rest in paths(poset, q, r) {
                rest.insert(0, (p, q));
                out.push(rest);
            }
        }
    }
    out
}

fn along(f: &CellularSheaf, path: &[(usize, usize)]) -> Matrix {
    let start = path.first().map(|e| e.0);
    let mut m = Matrix::identity(f.field(), start.map_or(0, |s| f.dim(s)));
    for &(a, b) in path {
        m = f.edge_map(a, b).mul(&m);
    }
    m
}

/// `Ext¹(F, G)` as extension classes: an extension is a choice of
/// `c_e: F_p → G_q` on every cover `e = (p, q)` making the block-triangular
/// maps `[[G(e), c_e], [0, F(e)]]` functorial, modulo changes of splitting
/// `c_e ↦ c_e + G(e) h_p − h_q F(e)`. Returns `(dim Hom, dim Ext¹)`; the
/// homs are the splittings `h` that change nothing.
pub fn yoneda_ext(f: &CellularSheaf, g: &CellularSheaf) -> Result<(usize, usize)> {
    if f.poset() != g.poset() || f.field() != g.field() {
        return Err(Error::Shape("sheaves on different bases".into()));
    }
    let field = f.field();
    let poset = f.poset();
    let hasse = poset.hasse();
    let c_off: Vec<usize> = hasse.iter().scan(0, |acc, &(p, q)| { let o = *acc; *acc += g.dim(q) * f.dim(p); Some(o) }).collect();
    let nc: usize = hasse.iter().map(|&(p, q)| g.dim(q) * f.dim(p)).sum();
    let h_off: Vec<usize> = (0..poset.len()).scan(0, |acc, p| { let o = *acc; *acc += g.dim(p) * f.dim(p); Some(o) }).collect();
    let nh: usize = (0..poset.len()).map(|p| g.dim(p) * f.dim(p)).sum();

    // off-diagonal block of the composite along a path, as a function of c
    let path_block = |path: &[(usize, usize)]| -> Matrix {
        let (p, r) = (path[0].0, path.last().unwrap().1);
        let mut m = Matrix::zeros(field, g.dim(r) * f.dim(p), nc);
        for (k, &(a, b)) in path.iter().enumerate() {
            let before = along(f, &path[..k]);
            let before = if k == 0 { Matrix::identity(field, f.dim(p)) } else { before };
            let after = if k + 1 == path.len() { Matrix::identity(field, g.dim(r)) } else { along(g, &path[k + 1..]) };
            let e = poset.hasse_index(a, b).expect("cover");
            let lm = linear_map(field, g.dim(b), f.dim(a), (g.dim(r), f.dim(p)), |x| after.mul(x).mul(&before));
            let cur = m.block(0, m.rows(), c_off[e], lm.cols()).add(&lm);
            m.set_block(0, c_off[e], &cur);
        }
        m
    };
    let mut constraints: Vec<Matrix> = Vec::new();
    for p in 0..poset.len() {
        for r in 0..poset.len() {
            if !poset.lt(p, r) {
                continue;
            }
            let ps = paths(poset, p, r);
            let first = path_block(&ps[0]);
            for other in &ps[1..] {
                constraints.push(path_block(other).sub(&first));
            }
        }
    }
    let rank_constraints = if constraints.is_empty() { 0 } else { Matrix::vstack(field, nc, &constraints).rank() };
    let cocycles = nc - rank_constraints;

    let mut delta = Matrix::zeros(field, nc, nh);
    for (e, &(p, q)) in hasse.iter().enumerate() {
        let gp = g.edge_map(p, q);
        let fp = f.edge_map(p, q);
        let from_p = linear_map(field, g.dim(p), f.dim(p), (g.dim(q), f.dim(p)), |h| gp.mul(h));
        let from_q = linear_map(field, g.dim(q), f.dim(q), (g.dim(q), f.dim(p)), |h| h.mul(fp).neg());
        let cur = delta.block(c_off[e], from_p.rows(), h_off[p], from_p.cols()).add(&from_p);
        delta.set_block(c_off[e], h_off[p], &cur);
        let cur = delta.block(c_off[e], from_q.rows(), h_off[q], from_q.cols()).add(&from_q);
        delta.set_block(c_off[e], h_off[q], &cur);
    }
    let rd = delta.rank();
    Ok((nh - rd, cocycles - rd))
}

fn field_elements(field: Field) -> Result<Vec<Scalar>> {
    match field {
        Field::Prime(p) if p <= 7 => Ok((0..p as i64).map(|n| field.int(n)).collect()),
        _ => Err(Error::InvalidParameters("enumeration needs a field with at most 7 elements".into())),
    }
}

/// `|Hom(F, G)|` by trying every family of stalk maps; the dimension is its
/// logarithm to the base `|k|`. Refuses more than `2^20` candidates.
pub fn hom_by_enumeration(f: &CellularSheaf, g: &CellularSheaf) -> Result<usize> {
    let field = f.field();
    let elems = field_elements(field)?;
    let q = elems.len() as u64;
    let n = f.poset().len();
    let entries: usize = (0..n).map(|p| f.dim(p) * g.dim(p)).sum();
    let total = (q as f64).powi(entries as i32);
    if total > (1u64 << 20) as f64 {
        return Err(Error::Oversize(format!("{total} candidate maps")));
    }
    let mut count = 0u64;
    let mut digits = vec![0usize; entries];
    loop {
        let mut k = 0;
        let comps: Vec<Matrix> = (0..n)
            .map(|p| {
                Matrix::from_fn(field, g.dim(p), f.dim(p), |_, _| {
                    let v = elems[digits[k]].clone();
                    k += 1;
                    v
                })
            })
            .collect();
        if f.poset().hasse().iter().all(|&(a, b)| g.edge_map(a, b).mul(&comps[a]) == comps[b].mul(f.edge_map(a, b))) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == entries {
                let mut d = 0;
                let mut c = count;
                while c > 1 {
                    c /= q;
                    d += 1;
                }
                return Ok(d);
            }
            digits[i] += 1;
            if digits[i] < elems.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Matching families of `p` over `cover`, as a subspace of `⊕ P(Uᵢ)`.
fn matching(p: &Presheaf, cover: &[Mask]) -> Result<(Matrix, Vec<usize>)> {
    let field = p.field();
    let dims: Vec<usize> = cover.iter().map(|u| p.dim(u)).collect::<Result<_>>()?;
    let offs: Vec<usize> = dims.iter().scan(0, |a, d| { let o = *a; *a += d; Some(o) }).collect();
    let total: usize = dims.iter().sum();
    let mut rows = Vec::new();
    for i in 0..cover.len() {
        for j in i + 1..cover.len() {
            let w = mask_intersect(&cover[i], &cover[j]);
            let dw = p.dim(&w)?;
            let mut m = Matrix::zeros(field, dw, total);
            m.set_block(0, offs[i], &p.restrict(&cover[i], &w)?);
            m.set_block(0, offs[j], &p.restrict(&cover[j], &w)?.neg());
            rows.push(m);
        }
    }
    let basis = if rows.is_empty() { Matrix::identity(field, total) } else { Matrix::vstack(field, total, &rows).kernel_basis() };
    Ok((basis, offs))
}

/// `P⁺(U)` for every open `U`, as the colimit of matching families over all
/// coverings of `U` by nonempty opens, ordered by refinement.
pub fn plus_by_all_coverings(p: &Presheaf) -> Result<Vec<usize>> {
    let field = p.field();
    let poset = p.poset();
    let mut out = Vec::new();
    for u in p.opens() {
        let inside: Vec<Mask> = p
            .opens()
            .iter()
            .filter(|v| mask_subset(v, u) && v.iter().any(|&b| b))
            .cloned()
            .collect();
        if inside.len() > 12 {
            return Err(Error::Oversize(format!("{} opens inside {:?}", inside.len(), poset.describe(u))));
        }
        let mut covers: Vec<Vec<Mask>> = Vec::new();
        for bits in 0u32..(1 << inside.len()) {
            let members: Vec<Mask> = (0..inside.len()).filter(|i| bits >> i & 1 == 1).map(|i| inside[i].clone()).collect();
            let union = members.iter().fold(poset.none(), |acc, m| crate::cellsheaf::mask_union(&acc, m));
            if union == *u {
                covers.push(members);
            }
        }
        let spaces: Vec<(Matrix, Vec<usize>)> = covers.iter().map(|c| matching(p, c)).collect::<Result<_>>()?;
        let mut d = FinDiagram::new(field, spaces.iter().map(|s| s.0.cols()).collect());
        for (a, ca) in covers.iter().enumerate() {
            for (b, cb) in covers.iter().enumerate() {
                if a == b {
                    continue;
                }
                // cb refines ca: every member of cb lies in a member of ca
                let choice: Option<Vec<usize>> = cb.iter().map(|v| ca.iter().position(|w| mask_subset(v, w))).collect();
                let Some(choice) = choice else { continue };
                let (ka, oa) = &spaces[a];
                let (kb, ob) = &spaces[b];
                let ta: usize = ka.rows();
                let mut r = Matrix::zeros(field, kb.rows(), ta);
                for (j, v) in cb.iter().enumerate() {
                    let i = choice[j];
                    r.set_block(ob[j], oa[i], &p.restrict(&ca[i], v)?);
                }
                let m = kb.solve(&r.mul(ka)).ok_or_else(|| Error::Shape("refinement leaves matching families".into()))?;
                d.add_arrow(a, b, m)?;
            }
        }
        out.push(d.colimit()?.dim);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellsheaf::ext_dims;
    use crate::homalg::{is_flabby, is_flabby_finite};
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn diamond() -> Arc<FinitePoset> {
        Arc::new(FinitePoset::with_indices(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap())
    }

    fn random_sheaf<R: Rng>(rng: &mut R, field: Field, poset: Arc<FinitePoset>) -> CellularSheaf {
        // sums of constant sheaves on random up-sets, which are functorial by construction
        let opens = poset.all_opens().unwrap();
        let mut f = CellularSheaf::zero(field, poset.clone());
        for _ in 0..rng.gen_range(1..=2) {
            let u = &opens[rng.gen_range(0..opens.len())];
            f = f.direct_sum(&CellularSheaf::constant(field, poset.clone(), u).unwrap()).unwrap();
        }
        f
    }

    #[test]
    fn local_flabby_matches_all_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let p = diamond();
        for _ in 0..20 {
            let f = random_sheaf(&mut rng, Field::Rational, p.clone());
            assert_eq!(is_flabby_finite(&f).unwrap().is_none(), flabby_by_all_pairs(&f).unwrap());
        }
    }

    #[test]
    fn line_flabby_matches_interval_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let f = ConstructibleTSheaf::random(&mut rng, Field::Rational, vec![Rat::from_integer(0.into()), Rat::from_integer(1.into())], 1);
            assert_eq!(is_flabby(&f).unwrap().holds, flabby_by_interval_pairs(&f).unwrap());
        }
    }

    #[test]
    fn yoneda_matches_resolutions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = diamond();
        for _ in 0..20 {
            let f = random_sheaf(&mut rng, Field::Rational, p.clone());
            let g = random_sheaf(&mut rng, Field::Rational, p.clone());
            let (hom, ext1) = yoneda_ext(&f, &g).unwrap();
            let dims = ext_dims(&f, &g, 1).unwrap();
            assert_eq!((hom, ext1), (dims[0], dims[1]));
        }
    }

    #[test]
    fn enumerated_homs() {
        let field = Field::prime(2).unwrap();
        let p = Arc::new(FinitePoset::with_indices(2, &[(0, 1)]).unwrap());
        let k = CellularSheaf::constant(field, p.clone(), &p.full()).unwrap();
        let top = CellularSheaf::constant(field, p.clone(), &[false, true]).unwrap();
        // the open part includes into the constant sheaf, and nothing maps back
        assert_eq!(hom_by_enumeration(&top, &k).unwrap(), 1);
        assert_eq!(hom_by_enumeration(&k, &top).unwrap(), 0);
        assert_eq!(yoneda_ext(&top, &k).unwrap(), (1, 0));
        let closed = CellularSheaf::constant(field, p.clone(), &[true, false]).unwrap();
        assert_eq!(hom_by_enumeration(&k, &closed).unwrap(), 1);
        assert_eq!(yoneda_ext(&closed, &top).unwrap(), (0, 1));
    }

    #[test]
    fn plus_over_all_coverings_matches_principal() {
        let p = Arc::new(FinitePoset::with_indices(3, &[(0, 1), (0, 2)]).unwrap());
        let junk = Presheaf::constant(Field::Rational, p, true).unwrap();
        let plus = junk.plus().unwrap();
        assert_eq!(plus_by_all_coverings(&junk).unwrap(), plus.dims().to_vec());
    }
}
