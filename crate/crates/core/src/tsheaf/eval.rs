use num_traits::Signed;

use super::ConstructibleTSheaf;
use crate::error::{Error, Result};
use crate::exactla::{Field, Matrix};
use crate::lineorder::{CellComplex, Rat, SemilinearSet, TlocOpen};

impl ConstructibleTSheaf {
    /// The pushforward along `x ↦ x + t`.
    pub fn translate(&self, t: &Rat) -> Self {
        let complex = CellComplex::new(self.endpoints().iter().map(|e| e + t).collect());
        ConstructibleTSheaf::new(complex, self.sheaf.clone()).expect("translation keeps the cell order")
    }

    /// The union of the cells with nonzero stalk.
    pub fn support_set(&self) -> SemilinearSet {
        self.complex.set_of(&self.sheaf.support())
    }
}

/// Something that looks like a constructible sheaf on every bounded window.
pub trait LocalModel {
    fn field(&self) -> Field;
    /// A constructible sheaf agreeing with this one on `(−n, n)`.
    fn window(&self, n: i64) -> ConstructibleTSheaf;
}

impl LocalModel for ConstructibleTSheaf {
    fn field(&self) -> Field {
        ConstructibleTSheaf::field(self)
    }

    fn window(&self, _n: i64) -> ConstructibleTSheaf {
        self.clone()
    }
}

/// `⊕_{k ∈ ℤ} τ_{k·period} M` for a motif `M` with bounded support: a locally
/// finite sum with infinitely many endpoints.
#[derive(Clone, Debug)]
pub struct PeriodicSum {
    pub motif: ConstructibleTSheaf,
    pub period: Rat,
}

impl PeriodicSum {
    pub fn new(motif: ConstructibleTSheaf, period: Rat) -> Result<Self> {
        if !period.is_positive() {
            return Err(Error::MalformedPeriodic(format!("period {period} is not positive")));
        }
        if !motif.support_set().is_bounded() {
            return Err(Error::MalformedPeriodic("motif support is unbounded".into()));
        }
        Ok(PeriodicSum { motif, period })
    }
}

impl LocalModel for PeriodicSum {
    fn field(&self) -> Field {
        self.motif.field()
    }

    fn window(&self, n: i64) -> ConstructibleTSheaf {
        let supp = self.motif.support_set();
        let Some((lo, hi)) = supp.hull() else {
            return ConstructibleTSheaf::zero(self.field());
        };
        let (lo, hi) = (lo.finite().unwrap().clone(), hi.finite().unwrap().clone());
        let nn = Rat::from_integer(n.into());
        // translates k·period + [lo, hi] meeting [−n, n]
        let kmin = ((-&nn - &hi) / &self.period).floor().to_integer();
        let kmax = ((&nn - &lo) / &self.period).ceil().to_integer();
        let mut acc = ConstructibleTSheaf::zero(self.field());
        let mut k = kmin;
        while k <= kmax {
            let t = Rat::from_integer(k.clone()) * &self.period;
            acc = acc.direct_sum(&self.motif.translate(&t)).expect("same field");
            k += 1;
        }
        acc
    }
}

/// Sections over a locally-T open, as the inverse limit along `U ∩ (−n, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evaluation {
    /// The images of far stages stabilized from `from_stage` on.
    Stable { dim: usize, from_stage: usize, stage_dims: Vec<usize> },
    /// No stabilization within the examined depth: an inverse sequence.
    Pro { stage_dims: Vec<usize>, image_dims: Vec<usize> },
}

impl Evaluation {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Evaluation::Stable { dim, .. } => Some(*dim),
            Evaluation::Pro { .. } => None,
        }
    }

    pub fn stage_dims(&self) -> &[usize] {
        match self {
            Evaluation::Stable { stage_dims, .. } | Evaluation::Pro { stage_dims, .. } => stage_dims,
        }
    }
}

/// Evaluates on `U ∈ T_loc` through stages `1..=depth`. The image of the
/// deepest stage in each earlier one is tracked; if these images have constant
/// dimension over at least the last two transitions the limit is reported.
/// Otherwise the stage data is returned when `allow_pro` is set, and an error
/// otherwise.
pub fn evaluate<M: LocalModel + ?Sized>(model: &M, u: &TlocOpen, depth: usize, allow_pro: bool) -> Result<Evaluation> {
    if depth < 3 {
        return Err(Error::InvalidParameters("depth must be at least 3".into()));
    }
    u.validate()?;
    let w = model.window(depth as i64 + 1);
    let stages = (1..=depth)
        .map(|n| w.sections(&u.stage(n as i64)?))
        .collect::<Result<Vec<_>>>()?;
    let stage_dims: Vec<usize> = stages.iter().map(|s| s.dim()).collect();
    // composite from the deepest stage down to stage n
    let mut image_dims = vec![0; depth];
    let mut comp = Matrix::identity(w.field(), stage_dims[depth - 1]);
    image_dims[depth - 1] = stage_dims[depth - 1];
    for n in (0..depth - 1).rev() {
        let t = w.restriction_between(&stages[n + 1], &stages[n])?;
        comp = t.mul(&comp);
        image_dims[n] = comp.rank();
    }
    let last = image_dims[depth - 1];
    let mut from = depth - 1;
    while from > 0 && image_dims[from - 1] == last {
        from -= 1;
    }
    if from + 2 <= depth - 1 {
        return Ok(Evaluation::Stable {
            dim: last,
            from_stage: from + 1,
            stage_dims,
        });
    }
    if allow_pro {
        Ok(Evaluation::Pro { stage_dims, image_dims })
    } else {
        Err(Error::NotStable { depth, dims: stage_dims })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineorder::{int, SemilinearOpen};

    const Q: Field = Field::Rational;

    fn tl(s: &str) -> TlocOpen {
        TlocOpen::parse(s).unwrap()
    }

    #[test]
    fn constant_on_the_line() {
        let k = ConstructibleTSheaf::constant(Q, &SemilinearSet::line());
        let e = evaluate(&k, &TlocOpen::Finite(SemilinearOpen::line()), 6, false).unwrap();
        assert_eq!(e.dim(), Some(1));
        let two = ConstructibleTSheaf::constant(Q, &SemilinearSet::parse("(0,2)").unwrap());
        let e = evaluate(&two, &tl("(0,1)+(1,2)"), 6, false).unwrap();
        assert_eq!(e.dim(), Some(2));
    }

    #[test]
    fn integer_skyscrapers_form_a_pro_object() {
        let sum = PeriodicSum::new(ConstructibleTSheaf::skyscraper(Q, int(0)), int(1)).unwrap();
        let e = evaluate(&sum, &TlocOpen::Finite(SemilinearOpen::line()), 5, true).unwrap();
        assert_eq!(e.stage_dims(), &[1, 3, 5, 7, 9]);
        assert_eq!(e.dim(), None);
        assert!(matches!(
            evaluate(&sum, &TlocOpen::Finite(SemilinearOpen::line()), 5, false),
            Err(Error::NotStable { .. })
        ));
    }

    #[test]
    fn periodic_open_on_constant_sheaf_grows() {
        let k = ConstructibleTSheaf::constant(Q, &SemilinearSet::line());
        let e = evaluate(&k, &tl("periodic((0,1/2);1)"), 5, true).unwrap();
        assert_eq!(e.dim(), None);
        let bounded = ConstructibleTSheaf::constant(Q, &SemilinearSet::parse("(0,3)").unwrap());
        let e = evaluate(&bounded, &tl("periodic((0,1/2);1)"), 6, false).unwrap();
        assert_eq!(e.dim(), Some(3));
    }
}
