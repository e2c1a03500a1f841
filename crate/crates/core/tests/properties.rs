mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::constant_sections_by_sampling;
use tsite::cellsheaf::{hom_space, parse_poset_sheaf, write_poset_sheaf};
use tsite::exactla::{Field, Matrix};
use tsite::homalg::{is_flabby, random_flabby, random_map, random_ses};
use tsite::lineorder::{rat, Rat, SemilinearOpen, SemilinearSet};
use tsite::oracle::flabby_by_interval_pairs;
use tsite::spectrum::UltraPoint;
use tsite::tsheaf::{covering_exact, parse_line_sheaf, write_line_sheaf, ConstructibleTSheaf, TSheafMap};

const Q: Field = Field::Rational;

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Q), Just(Field::prime(2).unwrap()), Just(Field::prime(5).unwrap())]
}

fn matrix() -> impl Strategy<Value = (Field, Vec<Vec<i64>>)> {
    (field(), 1usize..5, 1usize..5).prop_flat_map(|(f, r, c)| (Just(f), prop::collection::vec(prop::collection::vec(-3i64..=3, c), r)))
}

fn endpoints() -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec(-6i64..=8, 0..4).prop_map(|v| {
        let mut e: Vec<Rat> = v.into_iter().map(|n| rat(n, 2)).collect();
        e.sort();
        e.dedup();
        e
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_nullity((f, rows) in matrix()) {
        let m = Matrix::from_i64(f, &rows);
        let ker = m.kernel_basis();
        prop_assert_eq!(m.rank() + ker.cols(), m.cols());
        prop_assert!(m.mul(&ker).is_zero());
        prop_assert_eq!(m.image_basis().cols(), m.rank());
        prop_assert_eq!(m.transpose().rank(), m.rank());
    }

    #[test]
    fn solving_recovers_images((f, rows) in matrix(), seed in any::<u64>()) {
        let m = Matrix::from_i64(f, &rows);
        let mut r = rng(seed);
        let x = Matrix::from_fn(f, m.cols(), 1, |_, _| f.int(rand::Rng::gen_range(&mut r, -2..=2)));
        let b = m.mul(&x);
        let y = m.solve(&b).expect("b is in the image");
        prop_assert_eq!(m.mul(&y), b);
    }

    #[test]
    fn set_operations_agree_pointwise(s1 in any::<u64>(), s2 in any::<u64>(), x in -12i64..=16) {
        let a = SemilinearSet::random(&mut rng(s1), -2, 4, 2, false);
        let b = SemilinearSet::random(&mut rng(s2), -2, 4, 2, false);
        let q = rat(x, 4);
        prop_assert_eq!(a.union(&b).contains(&q), a.contains(&q) || b.contains(&q));
        prop_assert_eq!(a.intersect(&b).contains(&q), a.contains(&q) && b.contains(&q));
        prop_assert_eq!(a.complement().contains(&q), !a.contains(&q));
        prop_assert_eq!(a.diff(&b).contains(&q), a.contains(&q) && !b.contains(&q));
    }

    #[test]
    fn constant_sections_match_sampling(s1 in any::<u64>(), s2 in any::<u64>()) {
        let z = SemilinearSet::random(&mut rng(s1), -2, 4, 2, false);
        let u = SemilinearOpen::random(&mut rng(s2), -2, 4, 2);
        let f = ConstructibleTSheaf::constant(Q, &z);
        prop_assert_eq!(f.section_dim(&u).unwrap(), constant_sections_by_sampling(&z, u.as_set()));
    }

    #[test]
    fn maps_out_of_an_open_constant_are_sections(s1 in any::<u64>(), s2 in any::<u64>()) {
        // Hom(k_U, k_Z) = Γ(U; k_Z)
        let u = SemilinearOpen::random(&mut rng(s1), -2, 4, 2);
        let z = SemilinearSet::random(&mut rng(s2), -2, 4, 2, false);
        let (a, b) = ConstructibleTSheaf::constant(Q, u.as_set()).align(&ConstructibleTSheaf::constant(Q, &z)).unwrap();
        prop_assert_eq!(hom_space(a.sheaf(), b.sheaf()).unwrap().dim(), constant_sections_by_sampling(&z, u.as_set()));
    }

    #[test]
    fn tensor_of_constants(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = SemilinearSet::random(&mut rng(s1), -2, 4, 2, false);
        let b = SemilinearSet::random(&mut rng(s2), -2, 4, 2, false);
        let t = ConstructibleTSheaf::constant(Q, &a).tensor(&ConstructibleTSheaf::constant(Q, &b)).unwrap();
        prop_assert!(t.is_isomorphic(&ConstructibleTSheaf::constant(Q, &a.intersect(&b))).unwrap());
    }

    #[test]
    fn line_format_round_trips(seed in any::<u64>(), ends in endpoints(), f in field()) {
        let s = ConstructibleTSheaf::random(&mut rng(seed), f, ends, 2);
        let text = write_line_sheaf(&s);
        prop_assert_eq!(parse_line_sheaf(&text, Q).unwrap(), s);
    }

    #[test]
    fn refinement_keeps_sections(seed in any::<u64>(), ends in endpoints(), extra in endpoints(), u in any::<u64>()) {
        let f = ConstructibleTSheaf::random(&mut rng(seed), Q, ends, 2);
        let u = SemilinearOpen::random(&mut rng(u), -3, 5, 2);
        prop_assert_eq!(f.refine(&extra).section_dim(&u).unwrap(), f.section_dim(&u).unwrap());
        prop_assert!(f.refine(&extra).is_isomorphic(&f).unwrap());
    }

    #[test]
    fn two_open_gluing(seed in any::<u64>(), ends in endpoints(), u in any::<u64>(), v in any::<u64>()) {
        let f = ConstructibleTSheaf::random(&mut rng(seed), Q, ends, 2);
        let u = SemilinearOpen::random(&mut rng(u), -3, 5, 2);
        let v = SemilinearOpen::random(&mut rng(v), -3, 5, 2);
        prop_assert!(covering_exact(&f, &[u, v]).unwrap());
    }

    #[test]
    fn flabby_verdict_matches_pairs(seed in any::<u64>(), ends in endpoints(), flabby in any::<bool>()) {
        let mut r = rng(seed);
        let f = if flabby { random_flabby(&mut r, Q, &ends, 2) } else { ConstructibleTSheaf::random(&mut r, Q, ends, 2) };
        let v = is_flabby(&f).unwrap().holds;
        prop_assert_eq!(v, flabby_by_interval_pairs(&f).unwrap());
        if flabby {
            prop_assert!(v);
        }
    }

    #[test]
    fn kernel_and_cokernel_are_exact(seed in any::<u64>(), e1 in endpoints(), e2 in endpoints()) {
        let mut r = rng(seed);
        let a = ConstructibleTSheaf::random(&mut r, Q, e1, 2);
        let b = ConstructibleTSheaf::random(&mut r, Q, e2, 2);
        let phi = random_map(&mut r, &a, &b).unwrap();
        let ker = phi.kernel();
        let coker = phi.cokernel();
        prop_assert!(ker.is_mono() && coker.is_epi());
        for q in 0..phi.complex().len() {
            let (k, p, c) = (&ker.map.comps[q], &phi.map.comps[q], &coker.map.comps[q]);
            prop_assert!(p.mul(k).is_zero() && c.mul(p).is_zero());
            prop_assert_eq!(k.cols() + p.rank(), p.cols());
            prop_assert_eq!(c.rows() + p.rank(), p.rows());
        }
    }

    #[test]
    fn generated_sequences_are_exact(seed in any::<u64>(), ends in endpoints()) {
        let mut r = rng(seed);
        let sub = ConstructibleTSheaf::random(&mut r, Q, ends.clone(), 1);
        let ses = random_ses(&mut r, &sub, &ends, 1).unwrap();
        prop_assert!(ses.is_exact());
        prop_assert!(ses.first.is_mono() && ses.second.is_epi());
    }

    #[test]
    fn points_print_and_parse(n in -20i64..20, d in 1i64..5, kind in 0u8..4) {
        let q = rat(n, d);
        let p = match kind {
            0 => UltraPoint::Principal(q),
            1 => UltraPoint::RightGerm(q),
            2 => UltraPoint::LeftGerm(q),
            _ => UltraPoint::Cut(q.clone(), q + rat(1, 3)),
        };
        prop_assert_eq!(p.to_string().parse::<UltraPoint>().unwrap(), p);
    }
}

#[test]
fn poset_format_round_trips() {
    use std::sync::Arc;
    use tsite::backends::{gen_finite, random_poset_sheaf, standard_shapes};
    let mut r = rng(11);
    for shape in standard_shapes() {
        let p = Arc::new(gen_finite(&shape).unwrap());
        for _ in 0..4 {
            let f = random_poset_sheaf(&mut r, Q, &p, 3).unwrap();
            let back = parse_poset_sheaf(&write_poset_sheaf(&f), Q).unwrap();
            assert_eq!(back.global_sections().dim(), f.global_sections().dim());
            assert_eq!(write_poset_sheaf(&back), write_poset_sheaf(&f), "{shape}");
        }
    }
}

#[test]
fn between_constants_requires_naturality() {
    let set = |s: &str| SemilinearSet::parse(s).unwrap();
    // the stalk at 1 maps to 0 while the edge (1,2) maps identically
    assert!(TSheafMap::between_constants(Q, &set("(0,2)"), &set("(1,3)")).is_err());
    let phi = TSheafMap::between_constants(Q, &set("(0,1)+(2,3)"), &set("(0,3)")).unwrap();
    for q in 0..phi.complex().len() {
        let m = &phi.map.comps[q];
        if m.rows() == 1 && m.cols() == 1 {
            assert!(m.is_identity());
        }
    }
}
