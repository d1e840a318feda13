//! Bayes-optimal ground truth.
//!
//! The score `g(x) = log PDF_F(x) - log PDF_H(x)` is the optimal anomaly score
//! for a TvS distribution; `g > 0` reproduces the Bayes classifier. Ideal
//! metrics are estimated by Monte Carlo on large balanced samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Class, Points};
use crate::error::{Error, Result};
use crate::metrics::{self, ScoreSet};
use crate::seed;
use crate::synth::{self, TvsDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthMetrics {
    pub fpr: f64,
    pub fnr: f64,
    pub aucroc: f64,
    /// Points drawn per class.
    pub n_points: usize,
    pub target_fpr: f64,
}

/// Log-density ratio of faulty over healthy at `x`.
pub fn gt_score(dist: &TvsDistribution, x: &[f64]) -> Result<f64> {
    if x.len() != dist.dim() {
        return Err(Error::Shape { expected: dist.dim(), got: x.len() });
    }
    Ok(score_unchecked(dist, x))
}

fn score_unchecked(dist: &TvsDistribution, x: &[f64]) -> f64 {
    dist.faulty.log_pdf_unchecked(x) - dist.healthy.log_pdf_unchecked(x)
}

/// Ground-truth scores for every row.
pub fn gt_scores(dist: &TvsDistribution, points: &Points) -> Result<Vec<f64>> {
    points.check_dim(dist.dim())?;
    Ok(points.rows().map(|r| score_unchecked(dist, r)).collect())
}

/// Monte-Carlo estimate of the ground-truth FPR, FNR and AUCROC.
///
/// Draws `batches * batch_size` points per class. Batch `i` of class `c` uses
/// the stream derived from `(seed, "gt-<c>", i)`, so the result does not depend
/// on how batches are scheduled. Score pools are concatenated in batch order.
pub fn estimate_gt_metrics(
    dist: &TvsDistribution,
    target_fpr: f64,
    batches: usize,
    batch_size: usize,
    seed: u64,
) -> Result<GroundTruthMetrics> {
    if batches < 1 || batch_size < 2 {
        return Err(Error::InvalidConfig(format!(
            "ground truth needs batches >= 1 and batch_size >= 2, got {batches} x {batch_size}"
        )));
    }
    if !(target_fpr > 0.0 && target_fpr < 1.0) {
        return Err(Error::InvalidConfig(format!("target FPR {target_fpr} outside (0, 1)")));
    }
    let pool = |class: Class, tag: &str| -> Vec<f64> {
        let per_batch: Vec<Vec<f64>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let s = seed::derive_seed(seed, tag, b as u64);
                let data = synth::sample(dist, class, batch_size, s);
                data.points.rows().map(|r| score_unchecked(dist, r)).collect()
            })
            .collect();
        per_batch.concat()
    };
    let healthy = pool(Class::Healthy, "gt-healthy");
    let faulty = pool(Class::Faulty, "gt-faulty");
    let scores = ScoreSet::new(healthy, faulty)?;
    let report = metrics::simple_predictor(&scores, target_fpr)?;
    Ok(GroundTruthMetrics {
        fpr: report.achieved_fpr,
        fnr: report.achieved_fnr,
        aucroc: metrics::aucroc(&scores)?,
        n_points: batches * batch_size,
        target_fpr,
    })
}
