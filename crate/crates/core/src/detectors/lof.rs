//! Local outlier factor.
//!
//! Training rows get their `k` neighbours among the other rows; query points
//! get theirs among all training rows. The local reachability density of a
//! point is the inverse mean of `max(k_distance(o), d(p, o))` over its
//! neighbours `o`; the score is the mean neighbour density over the point's own.

use rayon::prelude::*;

use super::neighbors::NeighborIndex;
use crate::data::Points;
use crate::error::FitErrorKind;

/// Mean reachability distances are floored here so duplicates stay finite.
pub const MIN_REACH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LofModel {
    index: NeighborIndex,
    k: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
    training_lof: Vec<f64>,
}

fn density(neigh: &[(f64, usize)], k_distance: &[f64]) -> f64 {
    let mean = neigh.iter().map(|&(d, o)| d.max(k_distance[o])).sum::<f64>() / neigh.len() as f64;
    1.0 / mean.max(MIN_REACH)
}

impl LofModel {
    pub fn fit(train: Points, k: usize) -> Result<Self, FitErrorKind> {
        let n = train.len();
        if k < 1 || k >= n {
            return Err(FitErrorKind::TooFewSamples { needed: k.max(1) + 1, available: n });
        }
        let index = NeighborIndex::new(train);
        let neigh = training_neighbors(&index, k);
        Ok(Self::from_neighbors(index, k, &neigh))
    }

    /// Builds the model from each training row's nearest other rows, closest
    /// first; lists longer than `k` are truncated.
    pub fn from_neighbors(index: NeighborIndex, k: usize, neigh: &[Vec<(f64, usize)>]) -> Self {
        let k_distance: Vec<f64> = neigh.iter().map(|nb| nb[k - 1].0).collect();
        let lrd: Vec<f64> = neigh.iter().map(|nb| density(&nb[..k], &k_distance)).collect();
        let training_lof = neigh
            .iter()
            .zip(&lrd)
            .map(|(nb, own)| nb[..k].iter().map(|&(_, o)| lrd[o]).sum::<f64>() / (k as f64 * own))
            .collect();
        Self { index, k, k_distance, lrd, training_lof }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// LOF of a query given its nearest training rows (at least `k`).
    pub fn score_neighbors(&self, nb: &[(f64, usize)]) -> f64 {
        let nb = &nb[..self.k];
        let own = density(nb, &self.k_distance);
        nb.iter().map(|&(_, o)| self.lrd[o]).sum::<f64>() / (self.k as f64 * own)
    }

    pub fn score(&self, points: &Points) -> Vec<f64> {
        points
            .as_flat()
            .par_chunks(points.dim().max(1))
            .map_init(Vec::new, |buf, q| self.score_neighbors(&self.index.k_nearest(q, self.k, None, buf)))
            .collect()
    }

    /// Standard LOF of each training row (self excluded from its neighbours).
    pub fn training_scores(&self) -> &[f64] {
        &self.training_lof
    }
}

/// The `k` nearest other rows of every indexed row.
pub fn training_neighbors(index: &NeighborIndex, k: usize) -> Vec<Vec<(f64, usize)>> {
    let pts = index.points();
    (0..index.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| index.k_nearest(pts.row(i), k, Some(i), buf))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook LOF by full sorting, independent of the model's code path.
    fn brute_lof(pts: &[[f64; 2]], k: usize) -> Vec<f64> {
        let n = pts.len();
        let d = |a: &[f64; 2], b: &[f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let nbrs: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut o: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                o.sort_by(|&a, &b| d(&pts[i], &pts[a]).partial_cmp(&d(&pts[i], &pts[b])).unwrap().then(a.cmp(&b)));
                o.truncate(k);
                o
            })
            .collect();
        let kd: Vec<f64> = (0..n).map(|i| d(&pts[i], &pts[nbrs[i][k - 1]])).collect();
        let lrd: Vec<f64> = (0..n)
            .map(|i| {
                let s: f64 = nbrs[i].iter().map(|&o| d(&pts[i], &pts[o]).max(kd[o])).sum();
                k as f64 / s
            })
            .collect();
        (0..n).map(|i| nbrs[i].iter().map(|&o| lrd[o]).sum::<f64>() / (k as f64 * lrd[i])).collect()
    }

    #[test]
    fn uniform_grid_interior_near_one() {
        let pts: Vec<[f64; 2]> = (0..100).map(|i| [(i % 10) as f64, (i / 10) as f64]).collect();
        let m = LofModel::fit(Points::from_rows(2, &pts).unwrap(), 4).unwrap();
        let oracle = brute_lof(&pts, 4);
        for (i, (got, want)) in m.training_scores().iter().zip(&oracle).enumerate() {
            assert!((got - want).abs() < 1e-12, "row {i}: {got} vs {want}");
            let (x, y) = (i % 10, i / 10);
            if (3..7).contains(&x) && (3..7).contains(&y) {
                assert!((got - 1.0).abs() < 1e-9, "interior row {i}: {got}");
            }
        }
    }

    #[test]
    fn outlier_scores_high() {
        let pts: Vec<[f64; 2]> = (0..100).map(|i| [(i % 10) as f64, (i / 10) as f64]).collect();
        let m = LofModel::fit(Points::from_rows(2, &pts).unwrap(), 5).unwrap();
        let s = m.score(&Points::from_rows(2, &[[4.5, 4.5], [40.0, 40.0]]).unwrap());
        assert!(s[0] < 1.2);
        assert!(s[1] > 5.0);
    }

    #[test]
    fn duplicates_stay_finite() {
        let pts = vec![[1.0, 1.0]; 6];
        let m = LofModel::fit(Points::from_rows(2, &pts).unwrap(), 3).unwrap();
        assert!(m.training_scores().iter().all(|v| v.is_finite()));
        let s = m.score(&Points::from_rows(2, &[[1.0, 1.0], [2.0, 2.0]]).unwrap());
        assert!(s.iter().all(|v| v.is_finite()));
        assert!(s[1] > s[0]);
    }

    #[test]
    fn k_must_leave_a_neighbour() {
        let p = Points::from_rows(1, &[[0.0], [1.0], [2.0]]).unwrap();
        assert!(LofModel::fit(p.clone(), 3).is_err());
        assert!(LofModel::fit(p, 2).is_ok());
    }
}
