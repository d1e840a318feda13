//! k-th nearest neighbour distance.

use rayon::prelude::*;

use super::neighbors::NeighborIndex;
use crate::data::Points;
use crate::error::FitErrorKind;

/// Scores a point by its distance to the `k`-th nearest training point.
/// A query that coincides with a training row counts that row as a neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    index: NeighborIndex,
    k: usize,
}

impl KnnModel {
    pub fn fit(train: Points, k: usize) -> Result<Self, FitErrorKind> {
        if k < 1 || k > train.len() {
            return Err(FitErrorKind::TooFewSamples { needed: k.max(1), available: train.len() });
        }
        Ok(Self { index: NeighborIndex::new(train), k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn score(&self, points: &Points) -> Vec<f64> {
        points
            .as_flat()
            .par_chunks(points.dim().max(1))
            .map_init(Vec::new, |buf, q| self.index.kth_distance(q, self.k, None, buf))
            .collect()
    }

    /// Leave-one-out scores of the training rows: each row's `k`-th neighbour
    /// among the other rows. Needs `k < n`.
    pub fn training_scores(&self) -> Result<Vec<f64>, FitErrorKind> {
        let n = self.index.len();
        if self.k >= n {
            return Err(FitErrorKind::TooFewSamples { needed: self.k + 1, available: n });
        }
        let pts = self.index.points();
        Ok((0..n)
            .into_par_iter()
            .map_init(Vec::new, |buf, i| self.index.kth_distance(pts.row(i), self.k, Some(i), buf))
            .collect())
    }
}
