//! Score-based metrics: the quantile-threshold anomaly predictor, AUCROC and
//! the FPR/FNR trade-off.
//!
//! Conventions: a point is predicted faulty iff `score > threshold`, so the
//! false-negative rate counts faulty scores `<= threshold`. Quantiles use
//! linear interpolation between order statistics at `h = (n - 1) q`
//! (Hyndman-Fan type 7). AUCROC counts ties between classes as one half.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Healthy and faulty scores of one detector on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub healthy: Vec<f64>,
    pub faulty: Vec<f64>,
}

impl ScoreSet {
    pub fn new(healthy: Vec<f64>, faulty: Vec<f64>) -> Result<Self> {
        if healthy.iter().chain(&faulty).any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("scores"));
        }
        Ok(Self { healthy, faulty })
    }

    /// The same scores with class roles exchanged.
    pub fn swapped(&self) -> Self {
        Self { healthy: self.faulty.clone(), faulty: self.healthy.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub threshold: f64,
    pub target_fpr: f64,
    pub achieved_fpr: f64,
    pub achieved_fnr: f64,
}

fn sorted_finite(scores: &[f64], what: &'static str) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptySample(what));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    let mut v = scores.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Type-7 quantile of an already sorted, nonempty slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let q = q.clamp(0.0, 1.0);
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Empirical quantile with linear interpolation at `h = (n - 1) q`.
pub fn empirical_quantile(scores: &[f64], q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidConfig(format!("quantile level {q} outside [0, 1]")));
    }
    let v = sorted_finite(scores, "quantile input")?;
    Ok(quantile_sorted(&v, q))
}

/// Threshold at the `1 - target_fpr` quantile of the healthy scores.
pub fn threshold_for_fpr(healthy_scores: &[f64], target_fpr: f64) -> Result<f64> {
    empirical_quantile(healthy_scores, 1.0 - target_fpr)
}

/// Fraction of faulty scores at or below the threshold.
pub fn fnr_at_threshold(faulty_scores: &[f64], threshold: f64) -> Result<f64> {
    if faulty_scores.is_empty() {
        return Err(Error::EmptySample("faulty scores"));
    }
    let missed = faulty_scores.iter().filter(|&&s| s <= threshold).count();
    Ok(missed as f64 / faulty_scores.len() as f64)
}

/// Fraction of healthy scores strictly above the threshold.
pub fn fpr_at_threshold(healthy_scores: &[f64], threshold: f64) -> Result<f64> {
    if healthy_scores.is_empty() {
        return Err(Error::EmptySample("healthy scores"));
    }
    let flagged = healthy_scores.iter().filter(|&&s| s > threshold).count();
    Ok(flagged as f64 / healthy_scores.len() as f64)
}

/// Fit the threshold on the healthy scores and report both error rates.
pub fn simple_predictor(scores: &ScoreSet, target_fpr: f64) -> Result<ThresholdReport> {
    let threshold = threshold_for_fpr(&scores.healthy, target_fpr)?;
    Ok(ThresholdReport {
        threshold,
        target_fpr,
        achieved_fpr: fpr_at_threshold(&scores.healthy, threshold)?,
        achieved_fnr: fnr_at_threshold(&scores.faulty, threshold)?,
    })
}

/// Twice the Mann-Whitney U count of faulty-over-healthy pairs; ties add 1.
///
/// Integer arithmetic keeps the count exact for any sample size that fits in
/// memory.
pub fn doubled_pair_count(faulty: &[f64], healthy: &[f64]) -> u64 {
    let mut f = faulty.to_vec();
    let mut h = healthy.to_vec();
    f.sort_unstable_by(f64::total_cmp);
    h.sort_unstable_by(f64::total_cmp);
    doubled_pair_count_sorted(&f, &h)
}

fn doubled_pair_count_sorted(f: &[f64], h: &[f64]) -> u64 {
    let mut below = 0usize; // healthy strictly below current faulty value
    let mut upto = 0usize; // healthy at or below current faulty value
    let mut total = 0u64;
    for &s in f {
        while below < h.len() && h[below] < s {
            below += 1;
        }
        if upto < below {
            upto = below;
        }
        while upto < h.len() && h[upto] <= s {
            upto += 1;
        }
        total += 2 * below as u64 + (upto - below) as u64;
    }
    total
}

/// AUCROC by rank statistics in `O(n log n)`.
pub fn aucroc(scores: &ScoreSet) -> Result<f64> {
    let f = sorted_finite(&scores.faulty, "faulty scores")?;
    let h = sorted_finite(&scores.healthy, "healthy scores")?;
    let twice_u = doubled_pair_count_sorted(&f, &h);
    Ok(twice_u as f64 / (2.0 * f.len() as f64 * h.len() as f64))
}

/// `(target_fpr, fnr)` pairs for a strictly increasing grid in `(0, 1)`.
pub fn tradeoff_curve(scores: &ScoreSet, fpr_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if fpr_grid.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidConfig("FPR grid values must lie in (0, 1)".into()));
    }
    if fpr_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("FPR grid must be strictly increasing".into()));
    }
    let healthy = sorted_finite(&scores.healthy, "healthy scores")?;
    if scores.faulty.is_empty() {
        return Err(Error::EmptySample("faulty scores"));
    }
    fpr_grid
        .iter()
        .map(|&t| {
            let thr = quantile_sorted(&healthy, 1.0 - t);
            Ok((t, fnr_at_threshold(&scores.faulty, thr)?))
        })
        .collect()
}

/// Mean squared `(test - validation)` difference; inputs are in percent.
pub fn mse(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptySample("metric pairs"));
    }
    Ok(pairs.iter().map(|(v, t)| (t - v) * (t - v)).sum::<f64>() / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(f: &[f64], h: &[f64]) -> f64 {
        let mut twice = 0u64;
        for a in f {
            for b in h {
                if a > b {
                    twice += 2;
                } else if a == b {
                    twice += 1;
                }
            }
        }
        twice as f64 / (2.0 * f.len() as f64 * h.len() as f64)
    }

    #[test]
    fn quantile_examples() {
        let tens: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(empirical_quantile(&[5.0], 0.3).unwrap(), 5.0);
        assert_eq!(empirical_quantile(&[5.0], 1.0).unwrap(), 5.0);
        assert!((empirical_quantile(&tens, 0.9).unwrap() - 8.1).abs() < 1e-12);
        assert_eq!(empirical_quantile(&tens, 1.0).unwrap(), 9.0);
        assert_eq!(empirical_quantile(&tens, 0.0).unwrap(), 0.0);
        assert!(matches!(empirical_quantile(&[], 0.5), Err(Error::EmptySample(_))));
    }

    #[test]
    fn threshold_examples() {
        let tens: Vec<f64> = (0..10).map(f64::from).collect();
        let t = threshold_for_fpr(&tens, 0.10).unwrap();
        assert!((t - 8.1).abs() < 1e-12);
        assert_eq!(fpr_at_threshold(&tens, t).unwrap(), 0.1);
        let t0 = threshold_for_fpr(&tens, 0.0).unwrap();
        assert_eq!(t0, 9.0);
        assert_eq!(fpr_at_threshold(&tens, t0).unwrap(), 0.0);
        // just below the maximum: the top score still counts as a false positive
        let t1 = threshold_for_fpr(&tens, 1e-12).unwrap();
        assert!(t1 < 9.0 && t1 > 9.0 - 1e-9);
        assert_eq!(fpr_at_threshold(&tens, t1).unwrap(), 0.1);
        assert!(threshold_for_fpr(&[], 0.1).is_err());
    }

    #[test]
    fn fnr_examples() {
        assert_eq!(fnr_at_threshold(&[3.0, 4.0], 1.0).unwrap(), 0.0);
        assert_eq!(fnr_at_threshold(&[3.0, 4.0], 5.0).unwrap(), 1.0);
        assert_eq!(fnr_at_threshold(&[1.0, 2.0, 3.0, 4.0], 2.5).unwrap(), 0.5);
        // equality counts as missed
        assert_eq!(fnr_at_threshold(&[2.0], 2.0).unwrap(), 1.0);
        assert!(fnr_at_threshold(&[], 0.0).is_err());
    }

    #[test]
    fn auc_examples() {
        let s = ScoreSet::new(vec![0.5, 0.1], vec![0.9, 0.4]).unwrap();
        assert_eq!(aucroc(&s).unwrap(), 0.75);
        let tied = ScoreSet::new(vec![1.0; 7], vec![1.0; 3]).unwrap();
        assert_eq!(aucroc(&tied).unwrap(), 0.5);
        let sep = ScoreSet::new(vec![0.0, 0.1], vec![5.0, 6.0, 7.0]).unwrap();
        assert_eq!(aucroc(&sep).unwrap(), 1.0);
        assert!(matches!(aucroc(&ScoreSet::new(vec![], vec![1.0]).unwrap()), Err(Error::EmptySample(_))));
        assert!(ScoreSet::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn tradeoff_examples() {
        let s = ScoreSet::new((0..100).map(f64::from).collect(), (200..300).map(f64::from).collect()).unwrap();
        for (_, fnr) in tradeoff_curve(&s, &[0.01, 0.1, 0.5]).unwrap() {
            assert_eq!(fnr, 0.0);
        }
        assert!(tradeoff_curve(&s, &[0.5, 0.25]).is_err());
        assert!(tradeoff_curve(&s, &[0.0, 0.25]).is_err());
        assert!(tradeoff_curve(&s, &[0.25, 1.0]).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[(90.0, 92.0)]).unwrap(), 4.0);
        assert_eq!(mse(&[(1.0, 1.0), (5.0, 5.0)]).unwrap(), 0.0);
        assert!(mse(&[]).is_err());
    }

    fn score_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        // coarse grid forces frequent ties
        prop::collection::vec((-20i32..20).prop_map(|v| v as f64 / 4.0), 1..max_len)
    }

    proptest! {
        #[test]
        fn rank_auc_equals_brute_force(f in score_vec(60), h in score_vec(60)) {
            let s = ScoreSet::new(h.clone(), f.clone()).unwrap();
            prop_assert_eq!(aucroc(&s).unwrap(), brute_auc(&f, &h));
        }

        #[test]
        fn swap_complements_without_ties(f in prop::collection::vec(-1e3f64..1e3, 1..40), h in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            prop_assume!(f.iter().all(|a| h.iter().all(|b| a != b)));
            let s = ScoreSet::new(h, f).unwrap();
            let a = aucroc(&s).unwrap();
            let b = aucroc(&s.swapped()).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn auc_invariant_under_monotone_transform(f in score_vec(40), h in score_vec(40)) {
            let t = |v: &Vec<f64>| v.iter().map(|x| (x * 0.7).exp() * 3.0 - 1.0).collect::<Vec<_>>();
            let a = aucroc(&ScoreSet::new(h.clone(), f.clone()).unwrap()).unwrap();
            let b = aucroc(&ScoreSet::new(t(&h), t(&f)).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn threshold_fpr_within_one_step(h in prop::collection::vec(-10f64..10.0, 1..300), target in 0.001f64..0.999) {
            let t = threshold_for_fpr(&h, target).unwrap();
            let fpr = fpr_at_threshold(&h, t).unwrap();
            prop_assert!(fpr <= target + 1.0 / h.len() as f64 + 1e-12);
        }
    }
}
