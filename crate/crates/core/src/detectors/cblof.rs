//! Cluster-based local outlier factor, unweighted variant.
//!
//! Clusters are ordered by size; the first `b` form the "large" group, where
//! `b` is the smallest index satisfying both the coverage rule (the top `b`
//! clusters hold at least `ALPHA` of the points) and the gap rule (cluster
//! `b-1` is at least `BETA` times cluster `b`), falling back to either rule
//! alone. Points score by distance to the nearest large centroid.

use super::kmeans;
use super::neighbors::sq_dist;
use crate::data::Points;
use crate::error::FitErrorKind;

pub const ALPHA: f64 = 0.9;
pub const BETA: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CblofModel {
    large: Points,
}

/// Number of large clusters given cluster sizes sorted in descending order.
pub fn large_cluster_count(sorted_sizes: &[usize]) -> Option<usize> {
    let n: usize = sorted_sizes.iter().sum();
    let mut alpha_first = None;
    let mut beta_first = None;
    let mut cum = 0usize;
    for i in 1..sorted_sizes.len() {
        cum += sorted_sizes[i - 1];
        let a = cum as f64 >= n as f64 * ALPHA;
        let b = sorted_sizes[i - 1] as f64 >= BETA * sorted_sizes[i] as f64;
        if a && b {
            return Some(i);
        }
        if a && alpha_first.is_none() {
            alpha_first = Some(i);
        }
        if b && beta_first.is_none() {
            beta_first = Some(i);
        }
    }
    alpha_first.or(beta_first)
}

impl CblofModel {
    pub fn fit(train: &Points, n_clusters: usize, seed: u64) -> Result<Self, FitErrorKind> {
        Self::fit_inner(train, n_clusters, seed, false)
    }

    /// As [`CblofModel::fit`], but when no split exists every cluster counts
    /// as large instead of failing.
    pub fn fit_lenient(train: &Points, n_clusters: usize, seed: u64) -> Result<Self, FitErrorKind> {
        Self::fit_inner(train, n_clusters, seed, true)
    }

    fn fit_inner(train: &Points, n_clusters: usize, seed: u64, lenient: bool) -> Result<Self, FitErrorKind> {
        let km = kmeans::fit(train, n_clusters, seed)?;
        let mut order: Vec<usize> = (0..n_clusters).collect();
        order.sort_by(|&a, &b| km.sizes[b].cmp(&km.sizes[a]).then(a.cmp(&b)));
        let sorted: Vec<usize> = order.iter().map(|&c| km.sizes[c]).collect();
        let b = match large_cluster_count(&sorted) {
            Some(b) => b,
            None if lenient => n_clusters,
            None => return Err(FitErrorKind::ClusterSplit),
        };
        Ok(Self { large: km.centroids.select(&order[..b]) })
    }

    pub fn large_centroids(&self) -> &Points {
        &self.large
    }

    pub fn score(&self, points: &Points) -> Vec<f64> {
        points
            .rows()
            .map(|r| self.large.rows().map(|c| sq_dist(r, c)).fold(f64::INFINITY, f64::min).sqrt())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_rules() {
        // coverage and gap agree at 2
        assert_eq!(large_cluster_count(&[50, 45, 3, 2]), Some(2));
        // coverage alone
        assert_eq!(large_cluster_count(&[30, 30, 30, 10]), Some(3));
        // coverage first holds at 2, but the first index where both hold is 3
        assert_eq!(large_cluster_count(&[46, 44, 9, 1]), Some(3));
        // gap holds only at 1, coverage only at 5: coverage wins
        assert_eq!(large_cluster_count(&[50, 10, 10, 10, 10, 10]), Some(5));
        assert_eq!(large_cluster_count(&[10]), None);
    }

    #[test]
    fn small_cluster_far_from_large() {
        let mut rows = Vec::new();
        for i in 0..90 {
            rows.push([(i % 10) as f64 * 0.01, (i / 10) as f64 * 0.01]);
        }
        for i in 0..3 {
            rows.push([20.0 + i as f64 * 0.01, 20.0]);
        }
        let p = Points::from_rows(2, &rows).unwrap();
        let m = CblofModel::fit(&p, 2, 0).unwrap();
        assert_eq!(m.large_centroids().len(), 1);
        let s = m.score(&p);
        assert!(s[..90].iter().all(|&v| v < 0.1));
        assert!(s[90..].iter().all(|&v| v > 25.0));
    }

    #[test]
    fn even_clusters_have_no_split() {
        let rows: Vec<[f64; 1]> = (0..40).map(|i| [(i / 10) as f64 * 10.0 + (i % 10) as f64 * 0.01]).collect();
        let p = Points::from_rows(1, &rows).unwrap();
        assert_eq!(CblofModel::fit(&p, 4, 0), Err(FitErrorKind::ClusterSplit));
        assert_eq!(CblofModel::fit_lenient(&p, 4, 0).unwrap().large_centroids().len(), 4);
    }
}
