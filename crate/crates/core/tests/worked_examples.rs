//! Small examples worked out by hand, each checked against a value computed
//! without the sheaf machinery where that is possible.

mod common;

use std::sync::Arc;

use common::constant_sections_by_sampling;

use tsite::backends::{gen_finite, gen_line_sheaf, small_posets, FiniteShape};
use tsite::cellsheaf::{ext_dim, hom_space, CellularSheaf, FinitePoset, Presheaf};
use tsite::exactla::{Field, FinDiagram, Matrix};
use tsite::functors::{pushforward, rho_star, PiecewiseAffine, SiteMap, XSheaf};
use tsite::homalg::{coherent_presentation, ext_by_long_sequence, is_c_soft, is_flabby, is_flabby_global};
use tsite::lineorder::{int, rat, rwqc, rwqc_witness, SemilinearOpen, SemilinearSet, TlocOpen};
use tsite::spectrum::{membership, stalk_at, FiniteSpectrum, UltraPoint};
use tsite::tsheaf::{closure_sections_dim, evaluate, ind_colimit_sections, rho_shriek_system, ConstructibleTSheaf, IndSheaf, PeriodicSum, TSheafMap};

const Q: Field = Field::Rational;

fn set(s: &str) -> SemilinearSet {
    SemilinearSet::parse(s).unwrap()
}

fn open(s: &str) -> SemilinearOpen {
    SemilinearOpen::parse(s).unwrap()
}

fn k(s: &str) -> ConstructibleTSheaf {
    ConstructibleTSheaf::constant(Q, &set(s))
}

#[test]
fn linear_algebra_by_hand() {
    let m = Matrix::from_i64(Q, &[vec![1, 1]]);
    let ker = m.kernel_basis();
    assert!(ker.same_column_space(&Matrix::from_i64(Q, &[vec![1], vec![-1]])));
    // equalizer of the two projections k² ⇉ k
    let mut d = FinDiagram::new(Q, vec![2, 1]);
    d.add_arrow(0, 1, Matrix::from_i64(Q, &[vec![1, 0]])).unwrap();
    d.add_arrow(0, 1, Matrix::from_i64(Q, &[vec![0, 1]])).unwrap();
    assert_eq!(d.limit().unwrap().dim, 1);
    // coequalizer of id and −id: k/2k, zero over ℚ and not over F_2
    for (field, dim) in [(Q, 0), (Field::prime(2).unwrap(), 1)] {
        let mut d = FinDiagram::new(field, vec![1, 1]);
        d.add_arrow(0, 1, Matrix::from_i64(field, &[vec![1]])).unwrap();
        d.add_arrow(0, 1, Matrix::from_i64(field, &[vec![-1]])).unwrap();
        assert_eq!(d.colimit().unwrap().dim, dim);
    }
}

#[test]
fn relative_compactness() {
    assert!(rwqc(&open("(0,1)"), &open("(-1,2)")));
    assert!(!rwqc(&open("(0,1)"), &open("(0,2)")));
    let w = rwqc_witness(&open("(0,1)"), &open("(0,2)")).expect("a covering with no finite subcover");
    assert!(w.first_cover(&open("(0,1)"), 64).is_none());
}

#[test]
fn sections_of_constants() {
    assert_eq!(k("(0,1)").section_dim(&open("(0,2)")).unwrap(), 0);
    assert_eq!(k("(0,2)").section_dim(&open("(0,1)+(1,2)")).unwrap(), 2);
    assert_eq!(k("(0,2)").tensor(&k("(1,3)")).unwrap().section_dim(&open("(1,2)")).unwrap(), 1);
    assert!(k("(0,2)").tensor(&k("(1,3)")).unwrap().is_isomorphic(&k("(1,2)")).unwrap());
    for (z, u) in [("[1,2]", "(0,3)"), ("[0,1)", "(-1,1)"), ("(0,1)+{3}", "(-5,5)"), ("[1,2]+(3,4)", "(0,1)+(2,5)")] {
        assert_eq!(k(z).section_dim(&open(u)).unwrap(), constant_sections_by_sampling(&set(z), &set(u)), "k_{z} over {u}");
    }
}

#[test]
fn boundary_sheaf_and_its_extension() {
    let f = gen_line_sheaf(&"boundary:(0,1)+(2,3);(0,3)".parse().unwrap(), Q).unwrap();
    assert!(f.is_isomorphic(&k("[1,2]")).unwrap());
    let p = coherent_presentation(&k("[1,2]")).unwrap();
    assert!(p.verify() && p.in_t());
    // Γ((0,3); k_(0,1)) = 0 and Γ((0,1)∪(2,3); k_(0,1)) = k, so the cokernel is k
    assert_eq!(ext_by_long_sequence(&k("(0,1)"), &open("(0,3)"), &open("(0,1)+(2,3)")).unwrap(), 1);
    let (a, b) = k("[1,2]").align(&k("(0,1)")).unwrap();
    assert_eq!(ext_dim(a.sheaf(), b.sheaf(), 1).unwrap(), 1);
    // k_(0,2) has no nonzero map to k_(0,1)
    let (a, b) = k("(0,2)").align(&k("(0,1)")).unwrap();
    assert_eq!(hom_space(a.sheaf(), b.sheaf()).unwrap().dim(), 0);
    let inc = TSheafMap::between_constants(Q, &set("(0,1)+(2,3)"), &set("(0,3)")).unwrap();
    assert!(inc.is_mono() && !inc.is_epi());
}

#[test]
fn flabby_and_c_soft_verdicts() {
    let kx = ConstructibleTSheaf::constant(Q, &SemilinearSet::line());
    let v = is_flabby(&kx).unwrap();
    assert!(!v.holds);
    let w = v.witness.unwrap();
    assert!(w.rank < w.smaller_dim);
    assert!(is_flabby(&ConstructibleTSheaf::skyscraper(Q, int(1))).unwrap().holds);
    assert!(!is_c_soft(&kx).unwrap().holds);
    assert!(is_c_soft(&ConstructibleTSheaf::skyscraper(Q, int(1))).unwrap().holds);
    // one stalk per integer point, on every T_loc open
    assert_eq!(is_flabby_global(&ConstructibleTSheaf::skyscraper(Q, int(1)), 6).unwrap().verdict(), Some(true));
    assert_eq!(is_flabby_global(&kx, 6).unwrap().verdict(), Some(false));
}

#[test]
fn evaluation_on_locally_bounded_opens() {
    let kx = ConstructibleTSheaf::constant(Q, &SemilinearSet::line());
    let e = evaluate(&kx, &TlocOpen::Finite(SemilinearOpen::line()), 6, false).unwrap();
    assert_eq!(e.dim(), Some(1));
    let e = evaluate(&k("(0,2)"), &TlocOpen::Finite(open("(0,1)+(1,2)")), 6, false).unwrap();
    assert_eq!(e.dim(), Some(2));
    // k at each integer: the stage over (−n,n) has 2n − 1 sections
    let sum = PeriodicSum::new(ConstructibleTSheaf::skyscraper(Q, int(0)), int(1)).unwrap();
    let e = evaluate(&sum, &TlocOpen::Finite(SemilinearOpen::line()), 5, true).unwrap();
    assert_eq!(e.dim(), None);
    let expect: Vec<usize> = (1..=e.stage_dims().len()).map(|n| 2 * n - 1).collect();
    assert_eq!(e.stage_dims(), &expect[..]);
}

#[test]
fn ind_systems() {
    let s = IndSheaf::new(
        "k on (1/(n+1), 1)",
        |n| ConstructibleTSheaf::constant(Q, &SemilinearSet::open_q(rat(1, n as i64 + 1), int(1))),
        |n| {
            TSheafMap::between_constants(Q, &SemilinearSet::open_q(rat(1, n as i64 + 1), int(1)), &SemilinearSet::open_q(rat(1, n as i64 + 2), int(1)))
                .unwrap()
        },
        |_| 1,
    );
    let c = ind_colimit_sections(&s, &open("(1/2,1)")).unwrap();
    assert_eq!((c.dim, c.stable_from), (1, 1));
    // ρ_! of k_X: one section over a union touching at 1, two for ρ_*
    let kx = ConstructibleTSheaf::constant(Q, &SemilinearSet::line());
    let u = open("(0,1)+(1,2)");
    assert_eq!(closure_sections_dim(&kx, &u).unwrap(), 1);
    assert_eq!(rho_star(&XSheaf::new(kx.clone())).section_dim(&u).unwrap(), 2);
    let sheafified = ind_colimit_sections(&rho_shriek_system(&kx), &u).unwrap().dim;
    // components of a disjoint union of T-opens contribute separately
    let by_component: usize = u.components().iter().map(|c| ind_colimit_sections(&rho_shriek_system(&kx), c).unwrap().dim).sum();
    assert_eq!(sheafified, by_component);
}

#[test]
fn pushforward_along_doubling() {
    let f = k("[0,1)+(2,3)");
    let double = SiteMap::Line(PiecewiseAffine::affine(int(2), int(0)).unwrap());
    let pushed = pushforward(&double, &f).unwrap();
    assert_eq!(pushed.section_dim(&open("(0,2)")).unwrap(), f.section_dim(&open("(0,1)")).unwrap());
    assert!(pushforward(&SiteMap::ToPoint, &f).is_err());
}

#[test]
fn symbolic_points() {
    let u = open("(0,1)");
    assert!(membership(&"0+".parse().unwrap(), &u).unwrap());
    assert!(membership(&"1-".parse().unwrap(), &u).unwrap());
    let f = k("(0,1)");
    let at = |s: &str| stalk_at(&f, &s.parse::<UltraPoint>().unwrap()).unwrap();
    assert_eq!((at("1-"), at("1"), at("1+")), (1, 0, 0));
}

#[test]
fn finite_spectra() {
    let s = Arc::new(gen_finite(&FiniteShape::Sierpinski).unwrap());
    let spec = FiniteSpectrum::of_poset(&s).unwrap();
    assert_eq!(spec.len(), 2);
    let cone = gen_finite(&"conic_toy:2,2".parse().unwrap()).unwrap();
    assert_eq!(cone.len(), 6);
    // the numbers of unlabelled posets, computed independently
    assert_eq!(small_posets(4).iter().filter(|p| p.len() == 4).count(), 16);
}

#[test]
fn sheafification_on_two_points() {
    let d2 = Arc::new(FinitePoset::with_indices(2, &[]).unwrap());
    // P(X) = k², P({a}) = P({b}) = k with zero restrictions
    let p = Presheaf::from_fn(
        Q,
        d2.clone(),
        |m| m.iter().filter(|&&b| b).count(),
        |m, _, du, dv| {
            let _ = m;
            Matrix::zeros(Q, dv, du)
        },
    )
    .unwrap();
    let s = p.sheafify().unwrap();
    assert_eq!(s.dim(&d2.full()).unwrap(), 2);
    assert!(s.is_sheaf());
    let empty = Presheaf::constant(Q, d2.clone(), true).unwrap();
    assert_eq!(empty.sheafify().unwrap().dim(&d2.none()).unwrap(), 0);
    let cs = CellularSheaf::constant(Q, d2.clone(), &d2.full()).unwrap();
    assert_eq!(cs.global_sections().dim(), 2);
}
