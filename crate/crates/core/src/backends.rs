//! Canned instances: small finite spaces and named sheaves on the line.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cellsheaf::{hom_space, CellularSheaf, FinitePoset};
use crate::error::{Error, Result};
use crate::exactla::{Field, Matrix};
use crate::lineorder::{Rat, SemilinearOpen, SemilinearSet};
use crate::tsheaf::{sheaf_axioms_check, ConstructibleTSheaf, TSheafMap};

/// Largest finite instance the generators produce.
pub const MAX_POINTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteShape {
    /// An open point `a` and a closed point `b` specializing to it.
    Sierpinski,
    Chain(usize),
    Discrete(usize),
    /// Base points each lying below their own rays, so an open containing a
    /// base point contains all of its rays.
    ConicToy { base: usize, rays: usize },
    /// A bottom, two middle points and a top.
    Diamond,
}

impl FromStr for FiniteShape {
    type Err = Error;

    /// `sierpinski`, `diamond`, `chain:4`, `discrete:3`, `conic_toy:2,2`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once([':', '(']).map_or((s, ""), |(a, b)| (a, b.trim_end_matches(')')));
        let nums = params
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidParameters(format!("bad size {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let want = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidParameters(format!("{name} takes {k} parameter(s)")))
            }
        };
        match name.trim() {
            "sierpinski" => want(0).map(|_| FiniteShape::Sierpinski),
            "diamond" => want(0).map(|_| FiniteShape::Diamond),
            "chain" => want(1).map(|_| FiniteShape::Chain(nums[0])),
            "discrete" => want(1).map(|_| FiniteShape::Discrete(nums[0])),
            "conic_toy" => want(2).map(|_| FiniteShape::ConicToy { base: nums[0], rays: nums[1] }),
            other => Err(Error::InvalidParameters(format!("unknown finite instance {other:?}"))),
        }
    }
}

impl fmt::Display for FiniteShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiniteShape::Sierpinski => write!(f, "sierpinski"),
            FiniteShape::Diamond => write!(f, "diamond"),
            FiniteShape::Chain(n) => write!(f, "chain:{n}"),
            FiniteShape::Discrete(n) => write!(f, "discrete:{n}"),
            FiniteShape::ConicToy { base, rays } => write!(f, "conic_toy:{base},{rays}"),
        }
    }
}

pub fn gen_finite(shape: &FiniteShape) -> Result<FinitePoset> {
    let size = match shape {
        FiniteShape::Sierpinski => 2,
        FiniteShape::Diamond => 4,
        FiniteShape::Chain(n) | FiniteShape::Discrete(n) => *n,
        FiniteShape::ConicToy { base, rays } => base * (1 + rays),
    };
    if size > MAX_POINTS {
        return Err(Error::Oversize(format!("{shape} has {size} points, the bound is {MAX_POINTS}")));
    }
    match shape {
        FiniteShape::Sierpinski => FinitePoset::new(vec!["a".into(), "b".into()], &[(1, 0)]),
        FiniteShape::Diamond => FinitePoset::new(
            ["bot", "l", "r", "top"].map(String::from).to_vec(),
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        ),
        FiniteShape::Chain(n) => {
            let rel: Vec<_> = (1..*n).map(|i| (i - 1, i)).collect();
            FinitePoset::new((0..*n).map(|i| format!("c{i}")).collect(), &rel)
        }
        FiniteShape::Discrete(n) => FinitePoset::new((0..*n).map(|i| format!("d{i}")).collect(), &[]),
        FiniteShape::ConicToy { base, rays } => {
            let mut labels = Vec::new();
            let mut rel = Vec::new();
            for b in 0..*base {
                let bi = labels.len();
                labels.push(format!("b{b}"));
                for r in 0..*rays {
                    rel.push((bi, labels.len()));
                    labels.push(format!("r{b}_{r}"));
                }
            }
            FinitePoset::new(labels, &rel)
        }
    }
}

/// The shapes used by the randomized suites.
pub fn standard_shapes() -> Vec<FiniteShape> {
    vec![
        FiniteShape::Sierpinski,
        FiniteShape::Chain(3),
        FiniteShape::Discrete(3),
        FiniteShape::ConicToy { base: 2, rays: 2 },
        FiniteShape::Diamond,
        FiniteShape::Chain(4),
    ]
}

/// Every poset with at most `max` elements, one per isomorphism class.
pub fn small_posets(max: usize) -> Vec<FinitePoset> {
    let mut out = Vec::new();
    for n in 1..=max.min(6) {
        // every finite poset has a labelling along a linear extension, so
        // strictly upper triangular relations reach every class
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let perms = permutations(n);
        let mut seen = std::collections::HashSet::new();
        for bits in 0u32..(1 << pairs.len()) {
            let rel: Vec<(usize, usize)> = (0..pairs.len()).filter(|k| bits >> k & 1 == 1).map(|k| pairs[k]).collect();
            let has = |a: usize, b: usize| rel.contains(&(a, b));
            let closed = rel.iter().all(|&(a, b)| (b + 1..n).all(|c| !has(b, c) || has(a, c)));
            if !closed {
                continue;
            }
            let canon = perms
                .iter()
                .map(|p| {
                    let mut r: Vec<(usize, usize)> = rel.iter().map(|&(a, b)| (p[a], p[b])).collect();
                    r.sort_unstable();
                    r
                })
                .min()
                .unwrap_or_default();
            if seen.insert(canon) {
                out.push(FinitePoset::with_indices(n, &rel).expect("transitive and acyclic"));
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// A random sheaf on a finite poset: the image of a random map from a sum of
/// constant sheaves on up-sets to a sum of constant sheaves on convex sets.
pub fn random_poset_sheaf<R: Rng>(rng: &mut R, field: Field, poset: &Arc<FinitePoset>, max_terms: usize) -> Result<CellularSheaf> {
    let n = poset.len();
    let opens = poset.all_opens()?;
    let mut convex = Vec::new();
    for _ in 0..4 * n.max(1) {
        let m: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if poset.is_convex(&m) {
            convex.push(m);
        }
    }
    convex.extend(opens.iter().cloned());
    let sum = |rng: &mut R, pool: &[Vec<bool>]| -> Result<CellularSheaf> {
        let mut f = CellularSheaf::zero(field, poset.clone());
        for _ in 0..rng.gen_range(1..=max_terms.max(1)) {
            let s = &pool[rng.gen_range(0..pool.len())];
            f = f.direct_sum(&CellularSheaf::constant(field, poset.clone(), s)?)?;
        }
        Ok(f)
    };
    let a = sum(rng, &opens)?;
    let b = sum(rng, &convex)?;
    let h = hom_space(&a, &b)?;
    if h.dim() == 0 || rng.gen_bool(0.25) {
        return Ok(b);
    }
    let c = Matrix::from_fn(field, h.dim(), 1, |_, _| field.int(rng.gen_range(-3..=3)));
    Ok(h.combination(&c).image().source)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LineShape {
    Constant(SemilinearSet),
    Skyscraper(Rat),
    /// `k_{V∖U}`, the cokernel of `k_U → k_V`.
    Boundary(SemilinearOpen, SemilinearOpen),
    Random { seed: u64, endpoints: Vec<Rat>, max_dim: usize },
}

impl FromStr for LineShape {
    type Err = Error;

    /// `constant:[0,1)`, `skyscraper:1`, `boundary:(0,1)+(2,3);(0,3)`,
    /// `random:7;0,1,2;2`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameters(format!("expected <name>:<params>, got {s:?}")))?;
        let bad = |what: &str| Error::InvalidParameters(format!("{name}: {what}"));
        match name.trim() {
            "constant" => Ok(LineShape::Constant(SemilinearSet::parse(arg)?)),
            "skyscraper" => Ok(LineShape::Skyscraper(arg.trim().parse().map_err(|_| bad("bad point"))?)),
            "boundary" => {
                let (u, v) = arg.split_once(';').ok_or_else(|| bad("expected U;V"))?;
                Ok(LineShape::Boundary(SemilinearOpen::parse(u)?, SemilinearOpen::parse(v)?))
            }
            "random" => {
                let parts: Vec<&str> = arg.split(';').collect();
                if parts.len() != 3 {
                    return Err(bad("expected seed;endpoints;max_dim"));
                }
                let endpoints = parts[1]
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().parse::<Rat>().map_err(|_| bad("bad endpoint")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LineShape::Random {
                    seed: parts[0].trim().parse().map_err(|_| bad("bad seed"))?,
                    endpoints,
                    max_dim: parts[2].trim().parse().map_err(|_| bad("bad max_dim"))?,
                })
            }
            other => Err(Error::InvalidParameters(format!("unknown line instance {other:?}"))),
        }
    }
}

pub fn gen_line_sheaf(shape: &LineShape, field: Field) -> Result<ConstructibleTSheaf> {
    let f = match shape {
        LineShape::Constant(z) => ConstructibleTSheaf::constant(field, z),
        LineShape::Skyscraper(q) => ConstructibleTSheaf::skyscraper(field, q.clone()),
        LineShape::Boundary(u, v) => {
            if !u.is_subset(v) {
                return Err(Error::InvalidParameters(format!("{u} is not inside {v}")));
            }
            TSheafMap::between_constants(field, u.as_set(), v.as_set())?.cokernel().target
        }
        LineShape::Random { seed, endpoints, max_dim } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            ConstructibleTSheaf::random(&mut rng, field, endpoints.clone(), *max_dim)
        }
    };
    let report = sheaf_axioms_check(&f, 24, 0)?;
    if !report.passed() {
        return Err(Error::InvalidParameters(format!("generated data failed the sheaf axioms: {report:?}")));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineorder::int;

    #[test]
    fn finite_shapes() {
        let s = gen_finite(&"sierpinski".parse().unwrap()).unwrap();
        assert_eq!((s.len(), s.all_opens().unwrap().len()), (2, 3));
        assert_eq!(gen_finite(&FiniteShape::Discrete(3)).unwrap().all_opens().unwrap().len(), 8);
        let cone = gen_finite(&"conic_toy:2,2".parse().unwrap()).unwrap();
        assert_eq!(cone.len(), 6);
        for u in cone.all_opens().unwrap() {
            for b in [0, 3] {
                if u[b] {
                    assert!(u[b + 1] && u[b + 2]);
                }
            }
        }
        // each base point with a subset of its rays, or only rays: (1 + 4)² up-sets
        assert_eq!(cone.all_opens().unwrap().len(), 25);
        assert!(gen_finite(&FiniteShape::Chain(40)).is_err());
        assert!("chain:".parse::<FiniteShape>().is_err());
    }

    #[test]
    fn poset_counts() {
        // unlabelled posets on 1..=5 points
        let counts: Vec<usize> = (1..=5).map(|n| small_posets(n).len()).collect();
        assert_eq!(counts, [1, 3, 8, 24, 87]);
    }

    #[test]
    fn line_shapes() {
        let f = gen_line_sheaf(&"boundary:(0,1)+(2,3);(0,3)".parse().unwrap(), Field::Rational).unwrap();
        let expected = ConstructibleTSheaf::constant(Field::Rational, &SemilinearSet::closed_q(int(1), int(2)));
        assert!(f.is_isomorphic(&expected).unwrap());
        let r: LineShape = "random:7;0,1,2;2".parse().unwrap();
        assert_eq!(gen_line_sheaf(&r, Field::Rational).unwrap(), gen_line_sheaf(&r, Field::Rational).unwrap());
        assert!(gen_line_sheaf(&"boundary:(0,3);(0,1)".parse().unwrap(), Field::Rational).is_err());
    }

    #[test]
    fn random_poset_sheaves_are_sheaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for shape in standard_shapes() {
            let p = Arc::new(gen_finite(&shape).unwrap());
            for _ in 0..5 {
                random_poset_sheaf(&mut rng, Field::Rational, &p, 3).unwrap().check_functorial().unwrap();
            }
        }
    }
}
