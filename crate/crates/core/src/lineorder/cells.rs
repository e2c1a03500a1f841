use std::fmt;

use super::{sample_between, Endpoint, Rat, SemilinearOpen, SemilinearSet};
use crate::error::{Error, Result};

/// A cell of the decomposition of the line cut out by a finite endpoint set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Vertex(Rat),
    Edge(Endpoint, Endpoint),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Vertex(q) => write!(f, "{}", SemilinearSet::point(q.clone())),
            Cell::Edge(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// The decomposition of the line by a sorted endpoint set `e_0 < … < e_{m−1}`.
///
/// Cells are indexed left to right: index `2i` is the edge `(e_{i−1}, e_i)`
/// (with `e_{−1} = −∞`, `e_m = +∞`) and `2i + 1` is the vertex `e_i`. In the
/// specialization order a vertex lies below its two neighbouring edges, so
/// open sets whose endpoints lie in `E` correspond to up-sets of cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CellComplex {
    endpoints: Vec<Rat>,
}

impl CellComplex {
    pub fn new(mut endpoints: Vec<Rat>) -> Self {
        endpoints.sort();
        endpoints.dedup();
        CellComplex { endpoints }
    }

    pub fn endpoints(&self) -> &[Rat] {
        &self.endpoints
    }

    pub fn len(&self) -> usize {
        2 * self.endpoints.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_vertex(&self, i: usize) -> bool {
        i % 2 == 1
    }

    fn bound(&self, k: isize) -> Endpoint {
        if k < 0 {
            Endpoint::NegInf
        } else if k as usize >= self.endpoints.len() {
            Endpoint::PosInf
        } else {
            Endpoint::Finite(self.endpoints[k as usize].clone())
        }
    }

    pub fn cell(&self, i: usize) -> Cell {
        assert!(i < self.len(), "cell index out of range");
        if i % 2 == 1 {
            Cell::Vertex(self.endpoints[i / 2].clone())
        } else {
            let k = (i / 2) as isize;
            Cell::Edge(self.bound(k - 1), self.bound(k))
        }
    }

    pub fn cell_set(&self, i: usize) -> SemilinearSet {
        match self.cell(i) {
            Cell::Vertex(q) => SemilinearSet::point(q),
            Cell::Edge(a, b) => SemilinearSet::open(a, b),
        }
    }

    /// A rational point inside cell `i`.
    pub fn sample(&self, i: usize) -> Rat {
        match self.cell(i) {
            Cell::Vertex(q) => q,
            Cell::Edge(a, b) => sample_between(&a, &b),
        }
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: &Rat) -> usize {
        match self.endpoints.binary_search(x) {
            Ok(k) => 2 * k + 1,
            Err(k) => 2 * k,
        }
    }

    /// Covering relations `(vertex, edge)` of the specialization order.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        (0..self.endpoints.len())
            .flat_map(|k| [(2 * k + 1, 2 * k), (2 * k + 1, 2 * k + 2)])
            .collect()
    }

    /// The smallest open union of cells containing cell `i`.
    pub fn star(&self, i: usize) -> Vec<usize> {
        if self.is_vertex(i) {
            vec![i - 1, i, i + 1]
        } else {
            vec![i]
        }
    }

    pub fn star_set(&self, i: usize) -> SemilinearOpen {
        let mask = self.mask_from_indices(&self.star(i));
        SemilinearOpen::new(self.set_of(&mask)).expect("stars are open")
    }

    pub fn mask_from_indices(&self, idx: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.len()];
        for &i in idx {
            m[i] = true;
        }
        m
    }

    /// Does every endpoint of `s` lie in `E`?
    pub fn subordinate(&self, s: &SemilinearSet) -> bool {
        s.endpoints().iter().all(|e| self.endpoints.binary_search(e).is_ok())
    }

    /// Membership of each cell in `s`, which must be a union of cells.
    pub fn mask_of(&self, s: &SemilinearSet) -> Result<Vec<bool>> {
        if !self.subordinate(s) {
            return Err(Error::Shape(format!("{s} is not a union of cells")));
        }
        Ok((0..self.len()).map(|i| s.contains(&self.sample(i))).collect())
    }

    pub fn set_of(&self, mask: &[bool]) -> SemilinearSet {
        (0..self.len())
            .filter(|&i| mask[i])
            .fold(SemilinearSet::empty(), |acc, i| acc.union(&self.cell_set(i)))
    }

    /// Adds endpoints. The map sends each new cell to the old cell containing it.
    pub fn refine(&self, extra: &[Rat]) -> (CellComplex, Vec<usize>) {
        let mut e = self.endpoints.clone();
        e.extend(extra.iter().cloned());
        let fine = CellComplex::new(e);
        let map = (0..fine.len()).map(|i| self.locate(&fine.sample(i))).collect();
        (fine, map)
    }

    pub fn common_refinement(&self, other: &CellComplex) -> CellComplex {
        self.refine(&other.endpoints).0
    }

    /// Map from the cells of `self` to those of a coarser complex.
    pub fn map_to(&self, coarse: &CellComplex) -> Result<Vec<usize>> {
        if !coarse.endpoints.iter().all(|e| self.endpoints.binary_search(e).is_ok()) {
            return Err(Error::Shape("target complex is not coarser".into()));
        }
        Ok((0..self.len()).map(|i| coarse.locate(&self.sample(i))).collect())
    }
}

impl fmt::Display for CellComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = (0..self.len()).map(|i| self.cell(i).to_string()).collect();
        write!(f, "{}", cells.join(" "))
    }
}

/// `(−1,1), (−2,2), …, (−n,n)`.
pub fn exhaustion_chain(n: usize) -> Vec<SemilinearOpen> {
    (1..=n as i64).map(|k| SemilinearOpen::interval(-k, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;

    #[test]
    fn five_cells_for_two_endpoints() {
        let c = CellComplex::new(vec![int(1), int(0)]);
        assert_eq!(c.len(), 5);
        assert_eq!(c.to_string(), "(-inf,0) {0} (0,1) {1} (1,+inf)");
        assert_eq!(c.locate(&rat(1, 2)), 2);
        assert_eq!(c.locate(&int(1)), 3);
        assert_eq!(c.hasse(), vec![(1, 0), (1, 2), (3, 2), (3, 4)]);
    }

    #[test]
    fn refinement_splits_an_edge() {
        let c = CellComplex::new(vec![int(0), int(1)]);
        let (f, map) = c.refine(&[rat(1, 2)]);
        assert_eq!(f.len(), 7);
        assert_eq!(map, vec![0, 1, 2, 2, 2, 3, 4]);
        assert_eq!(f.cell(3), Cell::Vertex(rat(1, 2)));
    }

    #[test]
    fn empty_endpoint_set_is_one_cell() {
        let c = CellComplex::new(vec![]);
        assert_eq!(c.len(), 1);
        assert_eq!(c.cell(0), Cell::Edge(Endpoint::NegInf, Endpoint::PosInf));
    }

    #[test]
    fn masks_round_trip() {
        let c = CellComplex::new(vec![int(0), int(1), int(2)]);
        let s = SemilinearSet::parse("(0,1)+{2}+(2,+inf)").unwrap();
        let m = c.mask_of(&s).unwrap();
        assert_eq!(m, vec![false, false, true, false, false, true, true]);
        assert_eq!(c.set_of(&m), s);
        assert!(c.mask_of(&SemilinearSet::interval(0, 3)).is_err());
    }

    #[test]
    fn chain_of_length_two() {
        let ch = exhaustion_chain(2);
        assert_eq!(ch, vec![SemilinearOpen::interval(-1, 1), SemilinearOpen::interval(-2, 2)]);
        assert_eq!(exhaustion_chain(1).len(), 1);
    }
}
