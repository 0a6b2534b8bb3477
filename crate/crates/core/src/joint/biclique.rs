//! Maximal rectangles of a grid region.
//!
//! A rectangle `S × C` inside the region is maximal exactly when it is a
//! closed pair: `C` is the set of columns shared by every row of `S`, and
//! `S` is the set of rows containing all of `C`. These are the maximal
//! bicliques of the bipartite graph whose edges are the region's cells.

use std::collections::{BTreeSet, HashSet};

use super::region::{low_bits, GridRegion};

/// Row count up to which every row subset is enumerated directly.
pub const SUBSET_ENUMERATION_LIMIT: usize = 12;

/// Non-empty maximal rectangles `(rows, cols)` as bitmasks, sorted
/// lexicographically by row set and then column set.
pub fn maximal_rectangles(q: &GridRegion) -> Vec<(u64, u64)> {
    if q.shape().0 <= SUBSET_ENUMERATION_LIMIT {
        by_row_subsets(q)
    } else {
        by_closure(q)
    }
}

/// Rows whose column set contains `cols`.
pub fn rows_covering(q: &GridRegion, cols: u64) -> u64 {
    q.row_bits()
        .iter()
        .enumerate()
        .filter(|(_, &r)| r & cols == cols)
        .fold(0, |acc, (i, _)| acc | 1 << i)
}

/// Columns shared by every row in `rows` (all columns for the empty set).
pub fn common_cols(q: &GridRegion, rows: u64) -> u64 {
    let (_, m) = q.shape();
    q.row_bits()
        .iter()
        .enumerate()
        .filter(|(i, _)| rows >> i & 1 == 1)
        .fold(low_bits(m), |acc, (_, &r)| acc & r)
}

/// Pairs every non-empty row subset with its companion column set and
/// closes the row side.
pub fn by_row_subsets(q: &GridRegion) -> Vec<(u64, u64)> {
    let (n, _) = q.shape();
    let mut out = BTreeSet::new();
    for s in 1..(1u64 << n) {
        let c = common_cols(q, s);
        if c != 0 {
            out.insert((rows_covering(q, c), c));
        }
    }
    out.into_iter().collect()
}

/// Closed column sets are exactly the intersections of row masks, so close
/// the set of row masks under intersection with a worklist.
pub fn by_closure(q: &GridRegion) -> Vec<(u64, u64)> {
    let rows: Vec<u64> = q.row_bits().iter().copied().filter(|&r| r != 0).collect();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut work: Vec<u64> = Vec::new();
    for &r in &rows {
        if seen.insert(r) {
            work.push(r);
        }
    }
    while let Some(c) = work.pop() {
        for &r in &rows {
            let d = c & r;
            if d != 0 && seen.insert(d) {
                work.push(d);
            }
        }
    }
    let out: BTreeSet<(u64, u64)> = seen
        .into_iter()
        .map(|c| {
            let s = rows_covering(q, c);
            (s, common_cols(q, s))
        })
        .collect();
    out.into_iter().collect()
}
