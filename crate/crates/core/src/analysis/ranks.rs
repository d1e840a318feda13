//! Per-simulation ranking of detectors by test AUCROC.

use serde::{Deserialize, Serialize};

use super::{complete_groups, GroupKey};
use crate::error::Result;
use crate::metrics::empirical_quantile;
use crate::pipeline::SimulationRecord;

/// Ranks with 1 for the largest value; tied values share their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mean;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankGroup {
    pub key: GroupKey,
    pub detectors: Vec<String>,
    pub categories: Vec<String>,
    /// `rank_matrix[s][d]`: rank of detector `d` in simulation `s`.
    pub rank_matrix: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
    pub mean_test_aucroc: Vec<f64>,
    /// 2.5th and 97.5th percentiles of test AUCROC.
    pub test_aucroc_bounds: Vec<(f64, f64)>,
}

impl RankGroup {
    pub fn n_simulations(&self) -> usize {
        self.rank_matrix.len()
    }
}

pub fn rank_detectors(records: &[SimulationRecord]) -> Result<Vec<RankGroup>> {
    let mut out = Vec::new();
    for (key, rs) in complete_groups(records)? {
        let detectors: Vec<String> = rs[0].detectors.iter().map(|d| d.detector.clone()).collect();
        let categories = rs[0].detectors.iter().map(|d| d.category.to_string()).collect();
        let rank_matrix: Vec<Vec<f64>> = rs
            .iter()
            .map(|r| average_ranks(&r.detectors.iter().map(|d| d.test_aucroc).collect::<Vec<_>>()))
            .collect();
        let m = rs.len() as f64;
        let nd = detectors.len();
        let mean_ranks = (0..nd).map(|d| rank_matrix.iter().map(|row| row[d]).sum::<f64>() / m).collect();
        let mut mean_test_aucroc = Vec::with_capacity(nd);
        let mut test_aucroc_bounds = Vec::with_capacity(nd);
        for d in 0..nd {
            let aucs: Vec<f64> = rs.iter().map(|r| r.detectors[d].test_aucroc).collect();
            mean_test_aucroc.push(aucs.iter().sum::<f64>() / m);
            test_aucroc_bounds.push((empirical_quantile(&aucs, 0.025)?, empirical_quantile(&aucs, 0.975)?));
        }
        out.push(RankGroup { key, detectors, categories, rank_matrix, mean_ranks, mean_test_aucroc, test_aucroc_bounds });
    }
    Ok(out)
}
