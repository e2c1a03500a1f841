use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{depth_in, int, rat, Endpoint, Rat, SemilinearOpen, SemilinearSet};

/// Decides `U ⊂⊂ V`: `U` bounded and its closure inside `V`.
pub fn rwqc(u: &SemilinearOpen, v: &SemilinearOpen) -> bool {
    if u.is_empty() {
        return true;
    }
    u.is_t_open() && u.closure().is_subset(v.as_set())
}

/// A countable open covering `{member(n)}_{n ≥ 1}` of some open set, given symbolically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessCovering {
    /// The one-member covering `{V}`.
    Single(SemilinearOpen),
    /// `V ∩ (−n, n)`.
    Truncations(SemilinearOpen),
    /// `V ∖ [b − 1/n, b + 1/n]` for a point `b` outside `V`.
    Punctures(SemilinearOpen, Rat),
    /// The inner exhaustion [`SemilinearOpen::shrink`].
    Shrinking(SemilinearOpen),
}

impl WitnessCovering {
    pub fn member(&self, n: i64) -> SemilinearOpen {
        assert!(n >= 1);
        match self {
            WitnessCovering::Single(v) => v.clone(),
            WitnessCovering::Truncations(v) => v.truncate(n),
            WitnessCovering::Punctures(v, b) => {
                let eps = rat(1, n);
                v.minus_closed(&SemilinearSet::closed_q(b - &eps, b + &eps))
            }
            WitnessCovering::Shrinking(v) => v.shrink(n),
        }
    }

    pub fn covered(&self) -> &SemilinearOpen {
        match self {
            WitnessCovering::Single(v)
            | WitnessCovering::Truncations(v)
            | WitnessCovering::Punctures(v, _)
            | WitnessCovering::Shrinking(v) => v,
        }
    }

    /// Union of the first `n` members.
    pub fn prefix_union(&self, n: i64) -> SemilinearOpen {
        (1..=n).fold(SemilinearOpen::empty(), |acc, k| acc.union(&self.member(k)))
    }

    /// Smallest `n ≤ bound` whose prefix covers `u`.
    pub fn first_cover(&self, u: &SemilinearOpen, bound: i64) -> Option<i64> {
        let mut acc = SemilinearOpen::empty();
        for k in 1..=bound {
            acc = acc.union(&self.member(k));
            if u.is_subset(&acc) {
                return Some(k);
            }
        }
        None
    }
}

/// When `U ⊂⊂ V` fails, a covering of `V` no finite subfamily of which covers `U`.
pub fn rwqc_witness(u: &SemilinearOpen, v: &SemilinearOpen) -> Option<WitnessCovering> {
    if rwqc(u, v) {
        return None;
    }
    if !u.is_subset(v) {
        return Some(WitnessCovering::Single(v.clone()));
    }
    if !u.is_t_open() {
        return Some(WitnessCovering::Truncations(v.clone()));
    }
    let b = u
        .closure()
        .diff(v.as_set())
        .endpoints()
        .into_iter()
        .next()
        .expect("closure leaves V at an endpoint");
    Some(WitnessCovering::Punctures(v.clone(), b))
}

/// The standard coverings of `V` used to test the definition: inner
/// exhaustion, truncations, and punctures at the finite ends of `V`.
pub fn standard_coverings(v: &SemilinearOpen) -> Vec<WitnessCovering> {
    let mut out = vec![WitnessCovering::Shrinking(v.clone()), WitnessCovering::Truncations(v.clone())];
    for b in v.endpoints() {
        out.push(WitnessCovering::Punctures(v.clone(), b));
    }
    out
}

/// A subfamily of `family` covering `U`, or `None` if the whole family does not.
/// Members are dropped greedily while the rest still cover.
pub fn cover_finite_subcover(u: &SemilinearOpen, family: &[SemilinearOpen]) -> Option<Vec<usize>> {
    let union = |idx: &[usize]| {
        idx.iter()
            .fold(SemilinearOpen::empty(), |acc, &i| acc.union(&family[i]))
    };
    let mut keep: Vec<usize> = (0..family.len()).collect();
    if !u.is_subset(&union(&keep)) {
        return None;
    }
    let mut i = 0;
    while i < keep.len() {
        let mut trial = keep.clone();
        trial.remove(i);
        if u.is_subset(&union(&trial)) {
            keep = trial;
        } else {
            i += 1;
        }
    }
    Some(keep)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LwcReport {
    pub samples: usize,
    pub lwc1_checked: usize,
    pub lwc2_checked: usize,
    pub lwc3_checked: usize,
    pub failures: Vec<String>,
}

impl LwcReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A rational point of a nonempty open set.
fn some_point<R: Rng>(rng: &mut R, u: &SemilinearOpen) -> Rat {
    let iv = u.intervals();
    let (a, b) = &iv[rng.gen_range(0..iv.len())];
    let t = rat(rng.gen_range(1..8), 8);
    match (a, b) {
        (Endpoint::Finite(a), Endpoint::Finite(b)) => a + (b - a) * t,
        _ => super::sample_between(a, b),
    }
}

/// An open `W` with `U′ ⊂⊂ W ⊂⊂ U`, for `U′ ⊂⊂ U` nonempty.
pub fn interpolate(u_small: &SemilinearOpen, u: &SemilinearOpen) -> SemilinearOpen {
    let cl = u_small.closure();
    let mut gap: Option<Rat> = None;
    for e in cl.endpoints() {
        if let Some(d) = depth_in(u, &e) {
            gap = Some(match gap {
                Some(g) if g < d => g,
                _ => d,
            });
        }
    }
    let delta = gap.map_or_else(Rat::one, |g| g / int(2));
    SemilinearOpen::neighbourhood(&cl, &delta).intersect(u)
}

/// Checks the three axioms of a locally weakly quasi-compact space on random
/// bounded opens of the line, using the closure criterion and its witnesses.
pub fn lwc_validate(sample_size: usize, seed: u64) -> LwcReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LwcReport {
        samples: sample_size,
        ..Default::default()
    };
    for _ in 0..sample_size {
        let u = SemilinearOpen::random(&mut rng, -3, 3, 2);
        let v = SemilinearOpen::random(&mut rng, -3, 3, 2);
        // LWC1: shrinking intervals around a point form a ⊂⊂-neighbourhood basis
        if !u.is_empty() {
            let x = some_point(&mut rng, &u);
            let d = depth_in(&u, &x).unwrap_or_else(Rat::one);
            let mut n = 1;
            while rat(1, n) >= d {
                n += 1;
            }
            let nb = SemilinearOpen::open_q(&x - rat(1, n), &x + rat(1, n));
            let nested = SemilinearOpen::open_q(&x - rat(1, 2 * n), &x + rat(1, 2 * n));
            if !(rwqc(&nb, &u) && rwqc(&nested, &nb) && nb.contains(&x)) {
                rep.failures.push(format!("LWC1 at {x} in {u}"));
            }
            rep.lwc1_checked += 1;
        }
        // LWC2: intersections of relatively compact pieces
        let k = rng.gen_range(1..5);
        let (u1, v1) = (u.shrink(k), v.shrink(k));
        if rwqc(&u1, &u) && rwqc(&v1, &v) {
            rep.lwc2_checked += 1;
            if !rwqc(&u1.intersect(&v1), &u.intersect(&v)) {
                rep.failures.push(format!("LWC2 for {u1} in {u}, {v1} in {v}"));
            }
        } else {
            rep.failures.push(format!("inner exhaustion of {u} is not relatively compact"));
        }
        // LWC3: interpolation
        if !u1.is_empty() {
            rep.lwc3_checked += 1;
            let w = interpolate(&u1, &u);
            if !(rwqc(&u1, &w) && rwqc(&w, &u)) {
                rep.failures.push(format!("LWC3 for {u1} in {u}: interpolant {w}"));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> SemilinearOpen {
        SemilinearOpen::parse(s).unwrap()
    }

    /// Definitional check of `U ⊂⊂ V` against the standard coverings: each
    /// must have a finite prefix covering `U`.
    fn definitional(u: &SemilinearOpen, v: &SemilinearOpen) -> bool {
        u.is_subset(v) && standard_coverings(v).iter().all(|c| c.first_cover(u, 64).is_some())
    }

    #[test]
    fn relatively_compact_examples() {
        assert!(rwqc(&o("(0,1)"), &o("(-1,2)")));
        assert!(definitional(&o("(0,1)"), &o("(-1,2)")));
        assert!(!rwqc(&o("(0,1)"), &o("(0,2)")));
        assert!(rwqc(&SemilinearOpen::empty(), &o("(0,1)")));
        assert!(rwqc(&SemilinearOpen::empty(), &SemilinearOpen::empty()));
    }

    #[test]
    fn witness_has_no_finite_subcover() {
        let (u, v) = (o("(0,1)"), o("(0,2)"));
        let w = rwqc_witness(&u, &v).unwrap();
        assert_eq!(w, WitnessCovering::Punctures(v.clone(), int(0)));
        for n in 1..40 {
            assert!(w.member(n).is_subset(&v));
            assert!(!u.is_subset(&w.prefix_union(n)));
        }
        let unb = o("(0,+inf)");
        let w = rwqc_witness(&unb, &SemilinearOpen::line()).unwrap();
        assert!(!unb.is_subset(&w.prefix_union(30)));
    }

    #[test]
    fn exhaustion_members_are_nested() {
        let chain = super::super::exhaustion_chain(3);
        assert_eq!(chain.len(), 3);
        for pair in chain.windows(2) {
            assert!(rwqc(&pair[0], &pair[1]));
        }
    }

    #[test]
    fn finite_subcovers() {
        let u = o("(0,1)");
        let fam = [o("(0,3/5)"), o("(2/5,1)")];
        assert_eq!(cover_finite_subcover(&u, &fam), Some(vec![0, 1]));
        let gap = [o("(0,1/2)"), o("(3/5,1)")];
        assert_eq!(cover_finite_subcover(&u, &gap), None);
        assert_eq!(cover_finite_subcover(&SemilinearOpen::empty(), &[]), Some(vec![]));
        let redundant = [o("(0,1)"), o("(0,1/2)")];
        assert_eq!(cover_finite_subcover(&u, &redundant), Some(vec![0]));
    }

    #[test]
    fn interpolation_example() {
        let w = interpolate(&o("(0,1)"), &o("(-1,2)"));
        assert_eq!(w, o("(-1/2,3/2)"));
    }

    #[test]
    fn lwc_axioms_hold() {
        let rep = lwc_validate(100, 1);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.lwc3_checked > 10);
    }
}
