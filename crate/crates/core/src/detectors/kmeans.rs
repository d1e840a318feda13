//! Lloyd's k-means with k-means++ seeding and restarts.

use rand::Rng;

use super::neighbors::sq_dist;
use crate::data::Points;
use crate::error::FitErrorKind;
use crate::seed;

pub const N_INIT: usize = 10;
pub const MAX_ITER: usize = 300;
pub const REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Points,
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    pub inertia: f64,
}

fn nearest(centroids: &Points, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.rows().enumerate() {
        let d = sq_dist(x, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus<R: Rng>(points: &Points, k: usize, rng: &mut R) -> Points {
    let n = points.len();
    let mut centroids = Points::with_capacity(points.dim(), k);
    centroids.push(points.row(rng.random_range(0..n))).expect("same dim");
    let mut d2: Vec<f64> = points.rows().map(|r| sq_dist(r, centroids.row(0))).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centroids.push(points.row(pick)).expect("same dim");
        let c = centroids.len() - 1;
        for (i, r) in points.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, centroids.row(c)));
        }
    }
    centroids
}

fn lloyd(points: &Points, mut centroids: Points, tol: f64) -> Result<KMeans, FitErrorKind> {
    let (n, d, k) = (points.len(), points.dim(), centroids.len());
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    for _ in 0..MAX_ITER {
        for (i, r) in points.rows().enumerate() {
            (labels[i], dists[i]) = nearest(&centroids, r);
        }
        let mut sums = vec![0.0; k * d];
        let mut sizes = vec![0usize; k];
        for (i, r) in points.rows().enumerate() {
            sizes[labels[i]] += 1;
            for (s, v) in sums[labels[i] * d..(labels[i] + 1) * d].iter_mut().zip(r) {
                *s += v;
            }
        }
        // Reseed empty clusters with the points farthest from their centroids.
        let empty: Vec<usize> = (0..k).filter(|&c| sizes[c] == 0).collect();
        if !empty.is_empty() {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| dists[b].total_cmp(&dists[a]).then(a.cmp(&b)));
            let mut donors = order.into_iter();
            for &c in &empty {
                let Some(i) = donors.by_ref().find(|&i| sizes[labels[i]] > 1) else {
                    return Err(FitErrorKind::EmptyCluster(empty.len()));
                };
                let old = labels[i];
                sizes[old] -= 1;
                sizes[c] += 1;
                labels[i] = c;
                let r = points.row(i);
                for j in 0..d {
                    sums[old * d + j] -= r[j];
                    sums[c * d + j] = r[j];
                }
            }
        }
        let mut shift = 0.0;
        for c in 0..k {
            let row = centroids.row_mut(c);
            for j in 0..d {
                let v = sums[c * d + j] / sizes[c] as f64;
                shift += (v - row[j]) * (v - row[j]);
                row[j] = v;
            }
        }
        if shift <= tol {
            break;
        }
    }
    let mut sizes = vec![0usize; k];
    let mut inertia = 0.0;
    for (i, r) in points.rows().enumerate() {
        (labels[i], dists[i]) = nearest(&centroids, r);
        sizes[labels[i]] += 1;
        inertia += dists[i];
    }
    let empties = sizes.iter().filter(|&&s| s == 0).count();
    if empties > 0 {
        return Err(FitErrorKind::EmptyCluster(empties));
    }
    Ok(KMeans { centroids, labels, sizes, inertia })
}

/// Best of [`N_INIT`] seeded runs by inertia.
pub fn fit(points: &Points, k: usize, seed: u64) -> Result<KMeans, FitErrorKind> {
    let n = points.len();
    if k == 0 {
        return Err(FitErrorKind::InvalidHyperparameter("n_clusters must be positive".into()));
    }
    if n < k {
        return Err(FitErrorKind::TooFewSamples { needed: k, available: n });
    }
    let d = points.dim();
    let mean_var = if d == 0 {
        0.0
    } else {
        (0..d)
            .map(|j| {
                let m = points.rows().map(|r| r[j]).sum::<f64>() / n as f64;
                points.rows().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n as f64
            })
            .sum::<f64>()
            / d as f64
    };
    let tol = REL_TOL * mean_var;
    let mut best: Option<KMeans> = None;
    let mut last_err = None;
    for run in 0..N_INIT {
        let mut rng = seed::stream(seed, "kmeans", run as u64);
        let init = plus_plus(points, k, &mut rng);
        match lloyd(points, init, tol) {
            Ok(m) => {
                if best.as_ref().is_none_or(|b| m.inertia < b.inertia) {
                    best = Some(m);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(FitErrorKind::EmptyCluster(k)))
}
