//! Oracles shared by the integration tests.

use tsite::lineorder::{int, Rat, SemilinearSet};

/// Sections of `k_Z` over `U` by sampling: components of `U ∩ Z` that are
/// closed in `U`, read off a grid fine enough to separate all cells.
pub fn constant_sections_by_sampling(z: &SemilinearSet, u: &SemilinearSet) -> usize {
    let mut ends = z.endpoints();
    ends.extend(u.endpoints());
    ends.sort();
    ends.dedup();
    let mut grid: Vec<Rat> = Vec::new();
    match (ends.first(), ends.last()) {
        (Some(a), Some(_)) => grid.push(a - int(1)),
        _ => grid.push(int(0)),
    }
    for (i, e) in ends.iter().enumerate() {
        grid.push(e.clone());
        grid.push(ends.get(i + 1).map_or_else(|| e + int(1), |n| (e + n) / int(2)));
    }
    let inside: Vec<bool> = grid.iter().map(|x| u.contains(x) && z.contains(x)).collect();
    let in_u: Vec<bool> = grid.iter().map(|x| u.contains(x)).collect();
    let mut count = 0;
    let mut i = 0;
    while i < grid.len() {
        if !inside[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid.len() && inside[i + 1] {
            i += 1;
        }
        // a run ending in an open cell has the adjacent vertex as a limit point
        let vertex = |j: usize| ends.contains(&grid[j]);
        let left_closed = start == 0 || vertex(start) || !in_u[start - 1];
        let right_closed = i + 1 == grid.len() || vertex(i) || !in_u[i + 1];
        count += usize::from(left_closed && right_closed);
        i += 1;
    }
    count
}
