//! Exact brute-force nearest-neighbour queries.
//!
//! Ties in distance are broken by training-row index, which keeps neighbour
//! sets deterministic on data with duplicates or lattice structure.

use std::cmp::Ordering;

use crate::data::Points;

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn by_dist_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    points: Points,
}

impl NeighborIndex {
    pub fn new(points: Points) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    /// Distance from `query` to its `k`-th nearest indexed point (1-based `k`),
    /// skipping row `exclude` if given.
    pub fn kth_distance(&self, query: &[f64], k: usize, exclude: Option<usize>, buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(
            self.points
                .rows()
                .enumerate()
                .filter(|(i, _)| Some(*i) != exclude)
                .map(|(_, r)| sq_dist(query, r)),
        );
        let (_, kth, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
        kth.sqrt()
    }

    /// The `k` nearest rows as `(distance, index)`, closest first.
    pub fn k_nearest(&self, query: &[f64], k: usize, exclude: Option<usize>, buf: &mut Vec<(f64, usize)>) -> Vec<(f64, usize)> {
        buf.clear();
        buf.extend(
            self.points
                .rows()
                .enumerate()
                .filter(|(i, _)| Some(*i) != exclude)
                .map(|(i, r)| (sq_dist(query, r), i)),
        );
        if k < buf.len() {
            buf.select_nth_unstable_by(k - 1, by_dist_then_index);
            buf.truncate(k);
        }
        buf.sort_unstable_by(by_dist_then_index);
        buf.iter().map(|&(d2, i)| (d2.sqrt(), i)).collect()
    }
}
