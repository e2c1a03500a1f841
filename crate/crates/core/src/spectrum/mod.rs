//! The spectrum of ultrafilters: finite Boolean algebras and their points,
//! the equivalence between sheaves on the site and sheaves on the spectrum,
//! and symbolic points of the line with their stalks.

mod finite;
mod line;

pub use finite::{
    lattice_closure, random_members, round_trip, ultrafilter_validate, zeta_pull, zeta_push, FinBoolAlg, FiniteSpectrum,
    RoundTrip, SiteSheaf,
};
pub use line::{
    detecting_points, membership, sections_from_stalks, stalk_at, stalk_map, stalkwise_properties, UltraPoint,
};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backends::{gen_finite, random_poset_sheaf, standard_shapes};
use crate::error::Result;
use crate::exactla::Field;
use crate::homalg::{random_map, random_ses};
use crate::lineorder::{rat, Rat, SemilinearOpen};
use crate::tsheaf::ConstructibleTSheaf;

/// Outcome of [`equivalence_check`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub finite_instances: usize,
    pub shapes: usize,
    pub finite_failures: Vec<String>,
    pub maps: usize,
    /// Maps where the stalkwise verdict differs from the cellwise one.
    pub detection_failures: Vec<String>,
    pub basis_pairs: usize,
    pub basis_failures: Vec<String>,
    pub sequences: usize,
    pub stalk_exactness_failures: Vec<String>,
    pub section_failures: Vec<String>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.finite_failures.is_empty()
            && self.detection_failures.is_empty()
            && self.basis_failures.is_empty()
            && self.stalk_exactness_failures.is_empty()
            && self.section_failures.is_empty()
    }
}

fn random_endpoints<R: Rng>(rng: &mut R) -> Vec<Rat> {
    let mut pts: Vec<Rat> = (0..rng.gen_range(0..=3)).map(|_| rat(rng.gen_range(-4..=8), 2)).collect();
    pts.sort();
    pts.dedup();
    pts
}

/// Round trips on the finite backend, then stalk detection on the line.
pub fn equivalence_check(seed: u64, finite: usize, maps: usize) -> Result<EquivalenceReport> {
    let field = Field::Rational;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = EquivalenceReport::default();
    let shapes = standard_shapes();
    r.shapes = shapes.len();
    for i in 0..finite {
        let shape = &shapes[i % shapes.len()];
        let p = Arc::new(gen_finite(shape)?);
        let spec = FiniteSpectrum::new(p.len(), random_members(&mut rng, &p)?)?;
        let h = random_poset_sheaf(&mut rng, field, &spec.poset, 3)?;
        let g = SiteSheaf::from_space(&spec, &random_poset_sheaf(&mut rng, field, &p, 3)?)?;
        let rt = round_trip(&spec, &h, &g)?;
        if !rt.passed() || !spec.basis_quasi_compact() || spec.len() != spec.points.len() {
            r.finite_failures.push(format!("{shape} instance {i}: {rt:?}"));
        }
        r.finite_instances += 1;
    }

    for i in 0..maps {
        let pts = random_endpoints(&mut rng);
        let a = ConstructibleTSheaf::random(&mut rng, field, pts, 2);
        let pts = random_endpoints(&mut rng);
        let b = ConstructibleTSheaf::random(&mut rng, field, pts, 2);
        let (a, b) = a.align(&b)?;
        let phi = random_map(&mut rng, &a, &b)?;
        let stalkwise = stalkwise_properties(&phi)?;
        let direct = (phi.is_mono(), phi.is_epi(), phi.is_iso());
        if stalkwise != direct {
            r.detection_failures.push(format!("map {i}: stalks say {stalkwise:?}, cells say {direct:?}"));
        }
        r.maps += 1;
        for u in [SemilinearOpen::random(&mut rng, -2, 4, 2), SemilinearOpen::random(&mut rng, -2, 4, 3)] {
            if sections_from_stalks(&a, &u)? != a.section_dim(&u)? {
                r.section_failures.push(format!("map {i}: sections over {u}"));
            }
        }
    }

    for i in 0..maps / 2 {
        let u = SemilinearOpen::random(&mut rng, -2, 4, 2);
        let v = SemilinearOpen::random(&mut rng, -2, 4, 3);
        let mut ends = u.endpoints();
        ends.extend(v.endpoints());
        for alpha in detecting_points(&ends) {
            let (mu, mv) = (membership(&alpha, &u)?, membership(&alpha, &v)?);
            if membership(&alpha, &u.intersect(&v))? != (mu && mv) || membership(&alpha, &u.union(&v))? != (mu || mv) {
                r.basis_failures.push(format!("pair {i}: {u}, {v} at {alpha}"));
            }
        }
        r.basis_pairs += 1;
    }

    for i in 0..maps / 4 {
        let pts = random_endpoints(&mut rng);
        let sub = ConstructibleTSheaf::random(&mut rng, field, pts.clone(), 1);
        let ses = random_ses(&mut rng, &sub, &pts, 1)?;
        for alpha in detecting_points(ses.first.complex().endpoints()) {
            let a = line::stalk_map(&ses.first, &alpha)?;
            let b = line::stalk_map(&ses.second, &alpha)?;
            if !crate::homalg::exact3(&a, &b) {
                r.stalk_exactness_failures.push(format!("sequence {i} at {alpha}"));
            }
        }
        r.sequences += 1;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineorder::{int, SemilinearSet};
    use crate::tsheaf::TSheafMap;

    #[test]
    fn inclusion_is_detected_by_stalks() {
        let q = Field::Rational;
        let phi = TSheafMap::between_constants(q, &SemilinearSet::parse("(0,1)+(2,3)").unwrap(), &SemilinearSet::parse("(0,3)").unwrap()).unwrap();
        assert_eq!(stalkwise_properties(&phi).unwrap(), (true, false, false));
        let coker = phi.cokernel().target;
        for alpha in detecting_points(&[int(0), int(1), int(2), int(3)]) {
            let (x, _) = alpha.cell_in(&[int(0), int(1), int(2), int(3)]).unwrap();
            let on = x >= int(1) && x <= int(2);
            assert_eq!(stalk_at(&coker, &alpha).unwrap(), usize::from(on), "{alpha}");
        }
        let zero = TSheafMap::zero(&phi.source, &phi.target).unwrap();
        assert!(detecting_points(zero.complex().endpoints()).iter().all(|a| stalk_map(&zero, a).unwrap().is_zero()));
    }

    #[test]
    fn equivalence_holds() {
        let r = equivalence_check(5, 24, 40).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
