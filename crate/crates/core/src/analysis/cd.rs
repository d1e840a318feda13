//! Friedman test and Nemenyi critical difference.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// `P(range of k iid standard normals <= q)`, by Simpson's rule over the
/// position of the minimum.
fn range_cdf(q: f64, k: usize, normal: &Normal) -> f64 {
    const STEPS: usize = 4000;
    let (lo, hi) = (-9.0, 9.0);
    let h = (hi - lo) / STEPS as f64;
    let f = |z: f64| normal.pdf(z) * (normal.cdf(z + q) - normal.cdf(z)).max(0.0).powi(k as i32 - 1);
    let mut s = f(lo) + f(hi);
    for i in 1..STEPS {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    k as f64 * s * h / 3.0
}

/// Upper `alpha` quantile of the studentized range with `k` groups and
/// infinite degrees of freedom, divided by `sqrt(2)`.
pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    if k < 2 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("Nemenyi constant needs k >= 2 and alpha in (0, 1), got {k}, {alpha}")));
    }
    let normal = Normal::standard();
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.0, 20.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if range_cdf(mid, k, &normal) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdResult {
    pub detectors: Vec<String>,
    pub mean_ranks: Vec<f64>,
    pub n_simulations: usize,
    pub alpha: f64,
    pub q_alpha: f64,
    pub critical_difference: f64,
    pub friedman_chi2: f64,
    pub friedman_p_value: f64,
    /// Maximal sets of detectors, adjacent in rank order, whose mean-rank
    /// spread is below the critical difference.
    pub groups: Vec<Vec<String>>,
}

/// `rank_matrix[s][d]` holds detector `d`'s rank in simulation `s`.
pub fn critical_difference(rank_matrix: &[Vec<f64>], detectors: &[String], alpha: f64) -> Result<CdResult> {
    let m = rank_matrix.len();
    let k = detectors.len();
    if k < 2 {
        return Err(Error::InvalidConfig(format!("critical difference needs at least 2 detectors, got {k}")));
    }
    if m < 10 {
        return Err(Error::InvalidConfig(format!("critical difference needs at least 10 simulations, got {m}")));
    }
    if rank_matrix.iter().any(|row| row.len() != k) {
        return Err(Error::Shape { expected: k, got: rank_matrix.iter().map(Vec::len).find(|&l| l != k).unwrap_or(0) });
    }
    let (mf, kf) = (m as f64, k as f64);
    let mean_ranks: Vec<f64> = (0..k).map(|d| rank_matrix.iter().map(|r| r[d]).sum::<f64>() / mf).collect();
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * mf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let p = 1.0 - ChiSquared::new(kf - 1.0).expect("k >= 2").cdf(chi2);
    let q_alpha = nemenyi_q(k, alpha)?;
    let cd = q_alpha * (kf * (kf + 1.0) / (6.0 * mf)).sqrt();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| mean_ranks[a].total_cmp(&mean_ranks[b]).then(a.cmp(&b)));
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for i in 0..k {
        let mut j = i;
        while j + 1 < k && mean_ranks[order[j + 1]] - mean_ranks[order[i]] < cd {
            j += 1;
        }
        if j > i && spans.last().is_none_or(|&(_, end)| j > end) {
            spans.push((i, j));
        }
    }
    let groups = spans.iter().map(|&(i, j)| order[i..=j].iter().map(|&d| detectors[d].clone()).collect()).collect();
    Ok(CdResult {
        detectors: detectors.to_vec(),
        mean_ranks,
        n_simulations: m,
        alpha,
        q_alpha,
        critical_difference: cd,
        friedman_chi2: chi2,
        friedman_p_value: p.clamp(0.0, 1.0),
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_nemenyi_constants() {
        let table = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
        for (i, &want) in table.iter().enumerate() {
            let got = nemenyi_q(i + 2, 0.05).unwrap();
            assert!((got - want).abs() < 1.5e-3, "k={}: {got} vs {want}", i + 2);
        }
        let tab10 = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];
        for (i, &want) in tab10.iter().enumerate() {
            assert!((nemenyi_q(i + 2, 0.10).unwrap() - want).abs() < 1.5e-3);
        }
    }

    #[test]
    fn two_detector_cd() {
        let ranks = vec![vec![1.5, 1.5]; 100];
        let names = vec!["a".to_string(), "b".to_string()];
        let r = critical_difference(&ranks, &names, 0.05).unwrap();
        assert!((r.critical_difference - 0.196).abs() < 1e-3);
        assert_eq!(r.groups, vec![names.clone()]);
        assert_eq!(r.friedman_chi2, 0.0);
        assert!((r.friedman_p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_detectors_are_not_grouped() {
        // a always first, b and c alternate
        let ranks: Vec<Vec<f64>> = (0..40).map(|s| if s % 2 == 0 { vec![1.0, 2.0, 3.0] } else { vec![1.0, 3.0, 2.0] }).collect();
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let r = critical_difference(&ranks, &names, 0.05).unwrap();
        assert_eq!(r.mean_ranks, vec![1.0, 2.5, 2.5]);
        assert_eq!(r.groups, vec![vec!["b".to_string(), "c".to_string()]]);
        assert!(r.friedman_p_value < 1e-6);
    }

    #[test]
    fn degenerate_inputs() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(critical_difference(&vec![vec![1.0, 2.0]; 9], &names, 0.05).is_err());
        assert!(critical_difference(&vec![vec![1.0]; 20], &names[..1], 0.05).is_err());
        assert!(critical_difference(&vec![vec![1.0, 2.0, 3.0]; 20], &names, 0.05).is_err());
    }
}
