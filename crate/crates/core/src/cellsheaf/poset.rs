use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// Membership vector of a subset of the elements of a poset.
pub type Mask = Vec<bool>;

/// Largest poset whose open sets are enumerated exhaustively.
pub const MAX_ENUMERATED: usize = 20;

/// A finite partial order with its transitive closure and covering relations.
///
/// Open sets of the associated Alexandrov space are the up-sets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinitePoset {
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
    hasse: Vec<(usize, usize)>,
    up_cover: Vec<Vec<usize>>,
    down_cover: Vec<Vec<usize>>,
}

impl FinitePoset {
    /// Builds the order generated by `relations` (pairs `p ≤ q`).
    pub fn new(labels: Vec<String>, relations: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut leq = vec![vec![false; n]; n];
        for (p, row) in leq.iter_mut().enumerate() {
            row[p] = true;
        }
        for &(p, q) in relations {
            if p >= n || q >= n {
                return Err(Error::InvalidPoset(format!("relation {p}<={q} out of range")));
            }
            leq[p][q] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(Error::InvalidPoset(format!(
                        "cycle through {} and {}",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidPoset(format!("duplicate label {l}")));
            }
        }
        Ok(Self::from_closed(labels, leq))
    }

    fn from_closed(labels: Vec<String>, leq: Vec<Vec<bool>>) -> Self {
        let n = labels.len();
        let mut hasse = Vec::new();
        for p in 0..n {
            for q in 0..n {
                if p != q && leq[p][q] && !(0..n).any(|r| r != p && r != q && leq[p][r] && leq[r][q]) {
                    hasse.push((p, q));
                }
            }
        }
        let mut up_cover = vec![Vec::new(); n];
        let mut down_cover = vec![Vec::new(); n];
        for &(p, q) in &hasse {
            up_cover[p].push(q);
            down_cover[q].push(p);
        }
        FinitePoset {
            labels,
            leq,
            hasse,
            up_cover,
            down_cover,
        }
    }

    /// Elements named `0, 1, …, n−1`.
    pub fn with_indices(n: usize, relations: &[(usize, usize)]) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), relations)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: usize) -> &str {
        &self.labels[p]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn leq(&self, p: usize, q: usize) -> bool {
        self.leq[p][q]
    }

    pub fn lt(&self, p: usize, q: usize) -> bool {
        p != q && self.leq[p][q]
    }

    /// Covering relations `p ⋖ q`.
    pub fn hasse(&self) -> &[(usize, usize)] {
        &self.hasse
    }

    /// Position of the covering relation `p ⋖ q` in [`FinitePoset::hasse`].
    pub fn hasse_index(&self, p: usize, q: usize) -> Option<usize> {
        self.hasse.binary_search(&(p, q)).ok()
    }

    /// The induced order on the elements of `m`, with the new-to-old index map.
    pub fn induced(&self, m: &[bool]) -> (FinitePoset, Vec<usize>) {
        let idx = self.elements(m);
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let leq = idx
            .iter()
            .map(|&p| idx.iter().map(|&q| self.leq[p][q]).collect())
            .collect();
        (Self::from_closed(labels, leq), idx)
    }

    pub fn covers_above(&self, p: usize) -> &[usize] {
        &self.up_cover[p]
    }

    pub fn covers_below(&self, q: usize) -> &[usize] {
        &self.down_cover[q]
    }

    pub fn up(&self, p: usize) -> Mask {
        (0..self.len()).map(|q| self.leq[p][q]).collect()
    }

    pub fn down(&self, p: usize) -> Mask {
        (0..self.len()).map(|q| self.leq[q][p]).collect()
    }

    pub fn full(&self) -> Mask {
        vec![true; self.len()]
    }

    pub fn none(&self) -> Mask {
        vec![false; self.len()]
    }

    pub fn is_up_set(&self, m: &[bool]) -> bool {
        self.hasse.iter().all(|&(p, q)| !m[p] || m[q])
    }

    pub fn is_down_set(&self, m: &[bool]) -> bool {
        self.hasse.iter().all(|&(p, q)| !m[q] || m[p])
    }

    /// Locally closed subsets: `p ≤ q ≤ r` with `p, r` inside forces `q` inside.
    pub fn is_convex(&self, m: &[bool]) -> bool {
        let n = self.len();
        (0..n).all(|q| {
            m[q] || !(0..n).any(|p| m[p] && self.leq[p][q] && (0..n).any(|r| m[r] && self.leq[q][r]))
        })
    }

    pub fn check_open(&self, m: &[bool]) -> Result<()> {
        if m.len() != self.len() || !self.is_up_set(m) {
            return Err(Error::NotOpen(format!("{:?} is not an up-set", self.describe(m))));
        }
        Ok(())
    }

    pub fn up_closure(&self, m: &[bool]) -> Mask {
        (0..self.len())
            .map(|q| (0..self.len()).any(|p| m[p] && self.leq[p][q]))
            .collect()
    }

    pub fn down_closure(&self, m: &[bool]) -> Mask {
        (0..self.len())
            .map(|p| (0..self.len()).any(|q| m[q] && self.leq[p][q]))
            .collect()
    }

    pub fn elements(&self, m: &[bool]) -> Vec<usize> {
        (0..self.len()).filter(|&i| m[i]).collect()
    }

    pub fn describe(&self, m: &[bool]) -> Vec<String> {
        self.elements(m).into_iter().map(|i| self.labels[i].clone()).collect()
    }

    /// Minimal elements of `m`.
    pub fn minimal(&self, m: &[bool]) -> Vec<usize> {
        self.elements(m)
            .into_iter()
            .filter(|&p| !(0..self.len()).any(|r| m[r] && self.lt(r, p)))
            .collect()
    }

    /// Every up-set, in increasing order of their bit encodings.
    pub fn all_opens(&self) -> Result<Vec<Mask>> {
        let n = self.len();
        if n > MAX_ENUMERATED {
            return Err(Error::Oversize(format!("{n} elements; at most {MAX_ENUMERATED} enumerated")));
        }
        let up_bits: Vec<u64> = (0..n)
            .map(|p| (0..n).filter(|&q| self.leq[p][q]).fold(0u64, |b, q| b | 1 << q))
            .collect();
        let mut out = Vec::new();
        for bits in 0u64..(1u64 << n) {
            if (0..n).all(|p| bits & (1 << p) == 0 || bits & up_bits[p] == up_bits[p]) {
                out.push((0..n).map(|p| bits & (1 << p) != 0).collect());
            }
        }
        Ok(out)
    }

    /// A linear extension: every element precedes the elements above it.
    pub fn linear_extension(&self) -> Vec<usize> {
        let n = self.len();
        let mut indeg: Vec<usize> = (0..n).map(|q| self.down_cover[q].len()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&q| indeg[q] == 0).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(p) = queue.pop_front() {
            out.push(p);
            for &q in &self.up_cover[p] {
                indeg[q] -= 1;
                if indeg[q] == 0 {
                    queue.push_back(q);
                }
            }
        }
        out
    }

    /// The same elements with the reversed order.
    pub fn opposite(&self) -> FinitePoset {
        let n = self.len();
        let leq = (0..n).map(|p| (0..n).map(|q| self.leq[q][p]).collect()).collect();
        Self::from_closed(self.labels.clone(), leq)
    }

    /// Disjoint union.
    pub fn sum(&self, other: &FinitePoset) -> FinitePoset {
        let n = self.len();
        let m = other.len();
        let mut labels: Vec<String> = self.labels.iter().map(|l| format!("{l}.0")).collect();
        labels.extend(other.labels.iter().map(|l| format!("{l}.1")));
        let mut leq = vec![vec![false; n + m]; n + m];
        for p in 0..n {
            for q in 0..n {
                leq[p][q] = self.leq[p][q];
            }
        }
        for p in 0..m {
            for q in 0..m {
                leq[n + p][n + q] = other.leq[p][q];
            }
        }
        Self::from_closed(labels, leq)
    }
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel: Vec<String> = self
            .hasse
            .iter()
            .map(|&(p, q)| format!("{}<{}", self.labels[p], self.labels[q]))
            .collect();
        write!(f, "FinitePoset{{{:?}; {}}}", self.labels, rel.join(" "))
    }
}

pub fn mask_union(a: &[bool], b: &[bool]) -> Mask {
    a.iter().zip(b).map(|(x, y)| *x || *y).collect()
}

pub fn mask_intersect(a: &[bool], b: &[bool]) -> Mask {
    a.iter().zip(b).map(|(x, y)| *x && *y).collect()
}

pub fn mask_diff(a: &[bool], b: &[bool]) -> Mask {
    a.iter().zip(b).map(|(x, y)| *x && !*y).collect()
}

pub fn mask_subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(x, y)| !*x || *y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> FinitePoset {
        let rel: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        FinitePoset::with_indices(n, &rel).unwrap()
    }

    #[test]
    fn closure_and_hasse() {
        let p = chain(3);
        assert!(p.leq(0, 2));
        assert_eq!(p.hasse(), &[(0, 1), (1, 2)]);
        assert_eq!(p.linear_extension(), vec![0, 1, 2]);
    }

    #[test]
    fn cycles_are_rejected() {
        assert!(FinitePoset::with_indices(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn open_counts() {
        assert_eq!(chain(3).all_opens().unwrap().len(), 4);
        let discrete = FinitePoset::with_indices(3, &[]).unwrap();
        assert_eq!(discrete.all_opens().unwrap().len(), 8);
    }

    #[test]
    fn convexity() {
        let p = chain(3);
        assert!(p.is_convex(&[true, true, false]));
        assert!(!p.is_convex(&[true, false, true]));
        assert!(p.is_up_set(&[false, true, true]));
        assert!(!p.is_up_set(&[true, false, false]));
    }

    #[test]
    fn opposite_reverses() {
        let p = chain(2).opposite();
        assert!(p.leq(1, 0));
        assert_eq!(p.minimal(&p.full()), vec![1]);
    }
}
