//! Two-sided Mann-Whitney U test, normal approximation with tie and
//! continuity corrections.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// Pairs with `a > b`, ties counted one half.
    pub u: f64,
    pub z: f64,
    pub p_value: f64,
}

pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample("Mann-Whitney sample"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Mann-Whitney sample"));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut pooled: Vec<(f64, bool)> = a.iter().map(|&v| (v, true)).chain(b.iter().map(|&v| (v, false))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_a += pooled[i..=j].iter().filter(|p| p.1).count() as f64 * mid;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let n = n1 + n2;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return Ok(MannWhitney { u, z: 0.0, p_value: 1.0 });
    }
    let z = ((u - n1 * n2 / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    let p = 2.0 * (1.0 - Normal::standard().cdf(z));
    Ok(MannWhitney { u, z, p_value: p.min(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_counts_pairs() {
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(mann_whitney(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap().u, 9.0);
        // one tie: 0.5
        assert_eq!(mann_whitney(&[2.0], &[2.0, 1.0]).unwrap().u, 1.5);
    }

    #[test]
    fn identical_and_disjoint() {
        let a: Vec<f64> = (0..25).map(f64::from).collect();
        assert_eq!(mann_whitney(&a, &a).unwrap().p_value, 1.0);
        let b: Vec<f64> = (100..125).map(f64::from).collect();
        assert!(mann_whitney(&a, &b).unwrap().p_value < 1e-3);
        assert_eq!(mann_whitney(&[1.0, 1.0], &[1.0]).unwrap().p_value, 1.0);
        assert!(mann_whitney(&[], &[1.0]).is_err());
    }

    #[test]
    fn matches_reference_value() {
        // U = 2 for n = m = 4 without ties: z = (|2 - 8| - 0.5) / sqrt(16 * 9 / 12)
        let r = mann_whitney(&[1.0, 2.0, 3.0, 6.0], &[4.0, 5.0, 7.0, 8.0]).unwrap();
        assert_eq!(r.u, 2.0);
        let z = 5.5 / 12f64.sqrt();
        assert!((r.z - z).abs() < 1e-12);
        assert!((r.p_value - 0.112_351).abs() < 1e-4);
    }
}
