use crate::error::{Error, Result};
use crate::exactla::Matrix;
use crate::lineorder::{int, CellComplex, SemilinearOpen};
use crate::tsheaf::{ConstructibleTSheaf, TSheafMap};

/// `⊕_i k_{U_i}` on a decomposition to which every `U_i` is subordinate.
pub fn sum_of_constants(field: crate::exactla::Field, c: &CellComplex, opens: &[SemilinearOpen]) -> Result<ConstructibleTSheaf> {
    let masks: Vec<Vec<bool>> = opens.iter().map(|u| c.mask_of(u.as_set())).collect::<Result<_>>()?;
    let members = |q: usize| -> Vec<usize> { (0..opens.len()).filter(|&i| masks[i][q]).collect() };
    let dims: Vec<usize> = (0..c.len()).map(|q| members(q).len()).collect();
    let maps = c
        .hasse()
        .iter()
        .map(|&(p, q)| {
            let (mp, mq) = (members(p), members(q));
            Matrix::from_fn(field, mq.len(), mp.len(), |r, s| if mq[r] == mp[s] { field.one() } else { field.zero() })
        })
        .collect();
    ConstructibleTSheaf::from_data(field, c.endpoints().to_vec(), dims, maps)
}

/// An exact sequence `⊕_j k_{V_j} → ⊕_i k_{U_i} → F → 0`.
#[derive(Clone, Debug)]
pub struct CoherentPresentation {
    pub generators: Vec<SemilinearOpen>,
    pub relations: Vec<SemilinearOpen>,
    pub cover: TSheafMap,
    pub relation_map: TSheafMap,
}

impl CoherentPresentation {
    /// Whether every open involved is bounded, i.e. lies in `T`.
    pub fn in_t(&self) -> bool {
        self.generators.iter().chain(&self.relations).all(SemilinearOpen::is_t_open)
    }

    /// Exactness, checked cell by cell.
    pub fn verify(&self) -> bool {
        if !self.cover.is_epi() {
            return false;
        }
        let Ok(comp) = self.cover.after(&self.relation_map) else {
            return false;
        };
        if !comp.is_zero() {
            return false;
        }
        let c = &self.cover.map;
        let r = &self.relation_map.map;
        (0..self.cover.complex().len()).all(|q| {
            let kernel_dim = c.comps[q].cols() - c.comps[q].rank();
            r.comps[q].rank() == kernel_dim
        })
    }
}

/// Stalk generators: each new vector `x ∈ F_c` outside the image of earlier
/// ones becomes a summand `k_{star(c)}` mapping by `x`. Vertices go first so
/// that edge stalks are mostly reached from below.
fn generate(f: &ConstructibleTSheaf) -> Result<(Vec<SemilinearOpen>, TSheafMap)> {
    let c = f.complex().clone();
    let field = f.field();
    let sheaf = f.sheaf();
    let order: Vec<usize> = (1..c.len()).step_by(2).chain((0..c.len()).step_by(2)).collect();
    let mut gens: Vec<(usize, Matrix)> = Vec::new();
    for &cell in &order {
        let d = sheaf.dim(cell);
        let mut span = Matrix::zeros(field, d, 0);
        for (g, x) in &gens {
            if c.star(*g).contains(&cell) {
                span = Matrix::hstack(field, d, &[span, sheaf.map(*g, cell).mul(x)]);
            }
        }
        for j in 0..d {
            if span.rank() == d {
                break;
            }
            let e = Matrix::identity(field, d).col_vec(j);
            let grown = Matrix::hstack(field, d, &[span.clone(), e.clone()]);
            if grown.rank() > span.rank() {
                span = grown;
                gens.push((cell, e));
            }
        }
    }
    let opens: Vec<SemilinearOpen> = gens.iter().map(|(g, _)| c.star_set(*g)).collect();
    let source = sum_of_constants(field, &c, &opens)?;
    let comps = (0..c.len())
        .map(|q| {
            let cols: Vec<Matrix> = gens
                .iter()
                .filter(|(g, _)| c.star(*g).contains(&q))
                .map(|(g, x)| sheaf.map(*g, q).mul(x))
                .collect();
            Matrix::hstack(field, sheaf.dim(q), &cols)
        })
        .collect();
    Ok((opens, TSheafMap::new(&source, f, comps)?))
}

/// A finite presentation by sums of constant sheaves on stars of cells. The
/// decomposition is first widened by one unit on each side so that stars of
/// the original vertices are bounded; generators are unbounded only where
/// `F` has unbounded support.
pub fn coherent_presentation(f: &ConstructibleTSheaf) -> Result<CoherentPresentation> {
    let e = f.endpoints();
    let f = match (e.first(), e.last()) {
        (Some(a), Some(b)) => f.refine(&[a - int(1), b + int(1)]),
        _ => f.clone(),
    };
    let (generators, cover) = generate(&f)?;
    let kernel = cover.kernel();
    let (relations, onto_kernel) = generate(&kernel.source)?;
    let relation_map = kernel.after(&onto_kernel)?;
    let p = CoherentPresentation {
        generators,
        relations,
        cover,
        relation_map,
    };
    if !p.verify() {
        return Err(Error::Certificate("presentation failed to verify".into()));
    }
    Ok(p)
}

/// Coherent in the sense of the distinguished family: a verified
/// presentation by constant sheaves on bounded opens. This holds exactly when
/// the support is bounded.
pub fn is_coherent(f: &ConstructibleTSheaf) -> Result<bool> {
    let p = coherent_presentation(f)?;
    Ok(p.verify() && p.in_t())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::Field;
    use crate::lineorder::SemilinearSet;

    const Q: Field = Field::Rational;

    fn k(s: &str) -> ConstructibleTSheaf {
        ConstructibleTSheaf::constant(Q, &SemilinearSet::parse(s).unwrap())
    }

    #[test]
    fn closed_interval_is_presented() {
        let p = coherent_presentation(&k("[1,2]")).unwrap();
        assert!(p.verify() && p.in_t());
        // the presentation by (0,3) and (0,1)∪(2,3)
        let c = CellComplex::new((0..4).map(int).collect());
        let g = sum_of_constants(Q, &c, &[SemilinearOpen::interval(0, 3)]).unwrap();
        let f = k("[1,2]").refine_to(&c).unwrap();
        let comps = (0..c.len()).map(|q| Matrix::from_fn(Q, f.sheaf().dim(q), g.sheaf().dim(q), |_, _| Q.one())).collect();
        let onto = TSheafMap::new(&g, &f, comps).unwrap();
        let inc = TSheafMap::between_constants(Q, &SemilinearSet::parse("(0,1)+(2,3)").unwrap(), &SemilinearSet::parse("(0,3)").unwrap()).unwrap();
        let hand = CoherentPresentation {
            generators: vec![SemilinearOpen::interval(0, 3)],
            relations: vec![SemilinearOpen::parse("(0,1)+(2,3)").unwrap()],
            cover: onto,
            relation_map: inc.refine_to(&c).unwrap(),
        };
        assert!(hand.verify());
        assert!(hand.relation_map.is_mono());
    }

    #[test]
    fn constant_on_open_presents_itself() {
        let p = coherent_presentation(&k("(0,1)")).unwrap();
        assert_eq!(p.generators, vec![SemilinearOpen::interval(0, 1)]);
        assert!(p.relations.is_empty());
        let s = k("(0,1)").direct_sum(&k("(2,3)")).unwrap();
        assert_eq!(coherent_presentation(&s).unwrap().generators.len(), 2);
    }

    #[test]
    fn unbounded_support_needs_unbounded_generators() {
        let kx = k("(-inf,+inf)");
        let p = coherent_presentation(&kx).unwrap();
        assert!(p.verify());
        assert!(!p.in_t());
        assert!(!is_coherent(&kx).unwrap());
        assert!(is_coherent(&k("[0,5]")).unwrap());
    }
}
