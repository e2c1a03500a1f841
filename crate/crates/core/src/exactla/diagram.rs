use super::matrix::Matrix;
use super::scalar::Field;
use crate::error::{Error, Result};

/// A finite diagram of finite-dimensional spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinDiagram {
    pub field: Field,
    pub objects: Vec<usize>,
    pub arrows: Vec<(usize, usize, Matrix)>,
}

/// A limit cone. `embedding` is the injective map from the limit into the
/// product of all objects; `projections[i]` is its `i`-th block.
#[derive(Clone, Debug)]
pub struct Limit {
    pub dim: usize,
    pub embedding: Matrix,
    pub projections: Vec<Matrix>,
}

/// A colimit cocone. `quotient` is the surjection from the coproduct onto
/// the colimit; `injections[i]` is its `i`-th block.
#[derive(Clone, Debug)]
pub struct Colimit {
    pub dim: usize,
    pub quotient: Matrix,
    pub injections: Vec<Matrix>,
}

impl FinDiagram {
    pub fn new(field: Field, objects: Vec<usize>) -> FinDiagram {
        FinDiagram {
            field,
            objects,
            arrows: Vec::new(),
        }
    }

    pub fn add_arrow(&mut self, source: usize, target: usize, m: Matrix) -> Result<()> {
        self.check_arrow(source, target, &m)?;
        self.arrows.push((source, target, m));
        Ok(())
    }

    fn check_arrow(&self, s: usize, t: usize, m: &Matrix) -> Result<()> {
        if s >= self.objects.len() || t >= self.objects.len() {
            return Err(Error::Shape(format!("arrow {s}->{t} has no endpoint")));
        }
        if m.shape() != (self.objects[t], self.objects[s]) || m.field() != self.field {
            return Err(Error::Shape(format!(
                "arrow {s}->{t} is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                self.objects[t],
                self.objects[s]
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (s, t, m) in &self.arrows {
            self.check_arrow(*s, *t, m)?;
        }
        Ok(())
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.objects
            .iter()
            .map(|d| {
                let o = acc;
                acc += d;
                o
            })
            .collect()
    }

    fn total(&self) -> usize {
        self.objects.iter().sum()
    }

    /// The constraint matrix: one block row per arrow `s -> t`, equal to `f·π_s − π_t`.
    fn constraints(&self) -> Matrix {
        let off = self.offsets();
        let rows: usize = self.arrows.iter().map(|(_, t, _)| self.objects[*t]).sum();
        let mut c = Matrix::zeros(self.field, rows, self.total());
        let mut r = 0;
        for (s, t, f) in &self.arrows {
            let dt = self.objects[*t];
            let mut blk = Matrix::zeros(self.field, dt, self.total());
            blk.set_block(0, off[*s], f);
            let minus = Matrix::identity(self.field, dt).neg();
            let existing = blk.block(0, dt, off[*t], dt);
            blk.set_block(0, off[*t], &existing.add(&minus));
            c.set_block(r, 0, &blk);
            r += dt;
        }
        c
    }

    /// The relation map `⊕_arrows D_s -> ⊕ D_i`, `x ↦ ι_t f x − ι_s x`.
    fn relations(&self) -> Matrix {
        let off = self.offsets();
        let cols: usize = self.arrows.iter().map(|(s, _, _)| self.objects[*s]).sum();
        let mut r = Matrix::zeros(self.field, self.total(), cols);
        let mut c = 0;
        for (s, t, f) in &self.arrows {
            let ds = self.objects[*s];
            let mut blk = Matrix::zeros(self.field, self.total(), ds);
            blk.set_block(off[*t], 0, f);
            let existing = blk.block(off[*s], ds, 0, ds);
            blk.set_block(off[*s], 0, &existing.sub(&Matrix::identity(self.field, ds)));
            r.set_block(0, c, &blk);
            c += ds;
        }
        r
    }

    pub fn limit(&self) -> Result<Limit> {
        self.validate()?;
        let k = self.constraints().kernel_basis();
        let off = self.offsets();
        let projections = self
            .objects
            .iter()
            .zip(&off)
            .map(|(&d, &o)| k.block(o, d, 0, k.cols()))
            .collect();
        Ok(Limit {
            dim: k.cols(),
            embedding: k,
            projections,
        })
    }

    pub fn colimit(&self) -> Result<Colimit> {
        self.validate()?;
        let q = self.relations().cokernel_map();
        let off = self.offsets();
        let injections = self
            .objects
            .iter()
            .zip(&off)
            .map(|(&d, &o)| q.block(0, q.rows(), o, d))
            .collect();
        Ok(Colimit {
            dim: q.rows(),
            quotient: q,
            injections,
        })
    }

    /// Does a family of maps `legs[i]: C -> D_i` commute with every arrow?
    pub fn is_cone(&self, legs: &[Matrix]) -> bool {
        legs.len() == self.objects.len()
            && self
                .arrows
                .iter()
                .all(|(s, t, f)| f.mul(&legs[*s]) == legs[*t])
    }

    /// Does a family `legs[i]: D_i -> C` commute with every arrow?
    pub fn is_cocone(&self, legs: &[Matrix]) -> bool {
        legs.len() == self.objects.len()
            && self
                .arrows
                .iter()
                .all(|(s, t, f)| legs[*t].mul(f) == legs[*s])
    }
}

impl Limit {
    /// The unique map `u: C -> lim` with `projections[i]·u = legs[i]`.
    pub fn factor_cone(&self, legs: &[Matrix]) -> Result<Matrix> {
        let c = legs.first().map_or(0, |m| m.cols());
        let field = self.embedding.field();
        let stacked = Matrix::vstack(field, c, legs);
        self.embedding
            .solve(&stacked)
            .ok_or_else(|| Error::NotNatural("family is not a cone over the diagram".into()))
    }
}

impl Colimit {
    /// The unique map `u: colim -> C` with `u·injections[i] = legs[i]`.
    pub fn cofactor(&self, legs: &[Matrix]) -> Result<Matrix> {
        let r = legs.first().map_or(0, |m| m.rows());
        let field = self.quotient.field();
        let stacked = Matrix::hstack(field, r, legs);
        self.quotient
            .solve_left(&stacked)
            .ok_or_else(|| Error::NotNatural("family is not a cocone under the diagram".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rational;

    fn parallel_pair(field: Field, f: &[Vec<i64>], g: &[Vec<i64>], src: usize, tgt: usize) -> FinDiagram {
        let mut d = FinDiagram::new(field, vec![src, tgt]);
        d.add_arrow(0, 1, Matrix::from_i64(field, f)).unwrap();
        d.add_arrow(0, 1, Matrix::from_i64(field, g)).unwrap();
        d
    }

    #[test]
    fn equalizer_of_equal_maps() {
        let d = parallel_pair(Q, &[vec![1, 2]], &[vec![1, 2]], 2, 1);
        assert_eq!(d.limit().unwrap().dim, 2);
    }

    #[test]
    fn equalizer_of_coordinate_projections() {
        let d = parallel_pair(Q, &[vec![1, 0]], &[vec![0, 1]], 2, 1);
        let lim = d.limit().unwrap();
        assert_eq!(lim.dim, 1);
        let diag = Matrix::from_i64(Q, &[vec![1], vec![1]]);
        assert!(lim.projections[0].same_column_space(&diag));
    }

    #[test]
    fn product_and_coproduct() {
        let d = FinDiagram::new(Q, vec![2, 3]);
        assert_eq!(d.limit().unwrap().dim, 5);
        assert_eq!(FinDiagram::new(Q, vec![1, 1]).colimit().unwrap().dim, 2);
    }

    #[test]
    fn coequalizers_depend_on_field() {
        let same = parallel_pair(Q, &[vec![1]], &[vec![1]], 1, 1);
        assert_eq!(same.colimit().unwrap().dim, 1);
        let opp = parallel_pair(Q, &[vec![1]], &[vec![-1]], 1, 1);
        assert_eq!(opp.colimit().unwrap().dim, 0);
        let f2 = Field::prime(2).unwrap();
        let opp2 = parallel_pair(f2, &[vec![1]], &[vec![-1]], 1, 1);
        assert_eq!(opp2.colimit().unwrap().dim, 1);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut d = FinDiagram::new(Q, vec![2, 1]);
        assert!(d.add_arrow(0, 1, Matrix::identity(Q, 2)).is_err());
    }

    #[test]
    fn factor_through_equalizer() {
        let d = parallel_pair(Q, &[vec![1, 0]], &[vec![0, 1]], 2, 1);
        let lim = d.limit().unwrap();
        let leg0 = Matrix::from_i64(Q, &[vec![3], vec![3]]);
        let leg1 = Matrix::from_i64(Q, &[vec![3]]);
        let legs = [leg0, leg1];
        assert!(d.is_cone(&legs));
        let u = lim.factor_cone(&legs).unwrap();
        assert_eq!(lim.projections[0].mul(&u), legs[0]);
        let bad = [Matrix::from_i64(Q, &[vec![1], vec![2]]), Matrix::from_i64(Q, &[vec![1]])];
        assert!(lim.factor_cone(&bad).is_err());
    }

    #[test]
    fn cofactor_through_coequalizer() {
        let d = parallel_pair(Q, &[vec![1, 0]], &[vec![0, 1]], 2, 1);
        let col = d.colimit().unwrap();
        assert_eq!(col.dim, 0);
        let d = parallel_pair(Q, &[vec![1, 0]], &[vec![1, 0]], 2, 1);
        let col = d.colimit().unwrap();
        assert_eq!(col.dim, 1);
        let legs = [Matrix::from_i64(Q, &[vec![5, 0]]), Matrix::from_i64(Q, &[vec![5]])];
        assert!(d.is_cocone(&legs));
        let u = col.cofactor(&legs).unwrap();
        assert_eq!(u.mul(&col.injections[0]), legs[0]);
        assert_eq!(u.mul(&col.injections[1]), legs[1]);
        let bad = [Matrix::from_i64(Q, &[vec![1, 2]]), Matrix::from_i64(Q, &[vec![1]])];
        assert!(!d.is_cocone(&bad));
        assert!(col.cofactor(&bad).is_err());
    }
}
