//! Prediction bounds of the validation-to-test generalization error and
//! best-by-validation selection frequencies.
//!
//! Differences and squared errors are in percentage points.

use serde::{Deserialize, Serialize};

use super::{average_ranks, complete_groups, GroupKey};
use crate::error::Result;
use crate::metrics::{empirical_quantile, mse};
use crate::pipeline::{DetectorResult, SimulationRecord};

pub const SELECTED: &str = "selected-by-validation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    PerDetector,
    BestByValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub key: GroupKey,
    pub detector: String,
    pub n_simulations: usize,
    /// 2.5th percentile of test minus validation AUCROC.
    pub lower: f64,
    /// 97.5th percentile of test minus validation AUCROC.
    pub upper: f64,
    pub mean_difference: f64,
    pub mse_aucroc: f64,
    pub mse_fnr: f64,
    pub fnr_lower: f64,
    pub fnr_upper: f64,
    /// Mean per-simulation rank by squared AUCROC error, 1 = smallest.
    /// Not defined for the selected-by-validation row.
    pub mean_sq_rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub key: GroupKey,
    /// `validation` or `test`: which AUCROC the argmax is taken over.
    pub basis: String,
    pub detector: String,
    pub count: usize,
    pub percent: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generalization {
    pub bounds: Vec<BoundsRow>,
    pub selection: Vec<SelectionRow>,
}

fn pct(x: f64) -> f64 {
    100.0 * x
}

/// First index of the largest value.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn bounds_row(key: &GroupKey, name: &str, results: &[&DetectorResult], sq_rank: Option<f64>) -> Result<BoundsRow> {
    let auc: Vec<(f64, f64)> = results.iter().map(|d| (pct(d.validation_aucroc), pct(d.test_aucroc))).collect();
    let fnr: Vec<(f64, f64)> = results.iter().map(|d| (pct(d.validation_fnr), pct(d.test_fnr))).collect();
    let diff: Vec<f64> = auc.iter().map(|(v, t)| t - v).collect();
    let fdiff: Vec<f64> = fnr.iter().map(|(v, t)| t - v).collect();
    Ok(BoundsRow {
        key: key.clone(),
        detector: name.to_string(),
        n_simulations: results.len(),
        lower: empirical_quantile(&diff, 0.025)?,
        upper: empirical_quantile(&diff, 0.975)?,
        mean_difference: diff.iter().sum::<f64>() / diff.len() as f64,
        mse_aucroc: mse(&auc)?,
        mse_fnr: mse(&fnr)?,
        fnr_lower: empirical_quantile(&fdiff, 0.025)?,
        fnr_upper: empirical_quantile(&fdiff, 0.975)?,
        mean_sq_rank: sq_rank,
    })
}

fn frequencies(key: &GroupKey, basis: &str, names: &[String], picks: &[usize]) -> Vec<SelectionRow> {
    let mut rows: Vec<SelectionRow> = names
        .iter()
        .enumerate()
        .map(|(d, name)| {
            let count = picks.iter().filter(|&&p| p == d).count();
            SelectionRow {
                key: key.clone(),
                basis: basis.to_string(),
                detector: name.clone(),
                count,
                percent: (100.0 * count as f64 / picks.len() as f64).round() as u32,
            }
        })
        .filter(|r| r.count > 0)
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count));
    rows
}

pub fn generalization_bounds(records: &[SimulationRecord], selector: Selector) -> Result<Generalization> {
    let mut bounds = Vec::new();
    let mut selection = Vec::new();
    for (key, rs) in complete_groups(records)? {
        let names: Vec<String> = rs[0].detectors.iter().map(|d| d.detector.clone()).collect();
        match selector {
            Selector::PerDetector => {
                let sq_ranks: Vec<Vec<f64>> = rs
                    .iter()
                    .map(|r| {
                        let neg_sq: Vec<f64> =
                            r.detectors.iter().map(|d| -(pct(d.test_aucroc) - pct(d.validation_aucroc)).powi(2)).collect();
                        average_ranks(&neg_sq)
                    })
                    .collect();
                for (d, name) in names.iter().enumerate() {
                    let results: Vec<&DetectorResult> = rs.iter().map(|r| &r.detectors[d]).collect();
                    let mean_rank = sq_ranks.iter().map(|row| row[d]).sum::<f64>() / rs.len() as f64;
                    bounds.push(bounds_row(&key, name, &results, Some(mean_rank))?);
                }
            }
            Selector::BestByValidation => {
                let by_val: Vec<usize> = rs.iter().map(|r| argmax(r.detectors.iter().map(|d| d.validation_aucroc))).collect();
                let by_test: Vec<usize> = rs.iter().map(|r| argmax(r.detectors.iter().map(|d| d.test_aucroc))).collect();
                let chosen: Vec<&DetectorResult> = rs.iter().zip(&by_val).map(|(r, &i)| &r.detectors[i]).collect();
                bounds.push(bounds_row(&key, SELECTED, &chosen, None)?);
                selection.extend(frequencies(&key, "validation", &names, &by_val));
                selection.extend(frequencies(&key, "test", &names, &by_test));
            }
        }
    }
    Ok(Generalization { bounds, selection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fixtures::record;
    use crate::config::AnomalySetting;
    use crate::detectors::DetectorKind::{Knn, Lof, Xgb};
    use proptest::prelude::*;

    const RATE: AnomalySetting = AnomalySetting::Rate(0.005);

    #[test]
    fn equal_validation_and_test_give_zero_bounds() {
        let recs: Vec<_> = (0..5).map(|i| record(i, RATE, &[(Knn, 0.8 + 0.01 * i as f64, 0.8 + 0.01 * i as f64), (Lof, 0.7, 0.7)])).collect();
        for sel in [Selector::PerDetector, Selector::BestByValidation] {
            for b in generalization_bounds(&recs, sel).unwrap().bounds {
                assert_eq!((b.lower, b.upper, b.mse_aucroc), (0.0, 0.0, 0.0));
            }
        }
    }

    #[test]
    fn best_by_validation_uses_argmax() {
        let recs = vec![record(0, RATE, &[(Knn, 0.9, 0.8), (Lof, 0.85, 0.95)])];
        let g = generalization_bounds(&recs, Selector::BestByValidation).unwrap();
        let b = &g.bounds[0];
        assert_eq!(b.detector, SELECTED);
        assert!((b.lower + 10.0).abs() < 1e-9 && (b.upper + 10.0).abs() < 1e-9);
        let val: Vec<_> = g.selection.iter().filter(|s| s.basis == "validation").collect();
        assert_eq!((val[0].detector.as_str(), val[0].percent), ("knn", 100));
        let test: Vec<_> = g.selection.iter().filter(|s| s.basis == "test").collect();
        assert_eq!(test[0].detector, "lof");
    }

    #[test]
    fn ties_keep_suite_order_and_percentages_round() {
        let recs: Vec<_> = (0..3)
            .map(|i| if i == 0 { record(i, RATE, &[(Knn, 0.9, 0.9), (Lof, 0.9, 0.9)]) } else { record(i, RATE, &[(Knn, 0.8, 0.8), (Lof, 0.9, 0.9)]) })
            .collect();
        let g = generalization_bounds(&recs, Selector::BestByValidation).unwrap();
        let val: Vec<_> = g.selection.iter().filter(|s| s.basis == "validation").map(|s| (s.detector.as_str(), s.count, s.percent)).collect();
        assert_eq!(val, vec![("lof", 2, 67), ("knn", 1, 33)]);
    }

    #[test]
    fn squared_error_ranks() {
        let recs = vec![record(0, RATE, &[(Knn, 0.9, 0.8), (Lof, 0.9, 0.88), (Xgb, 0.9, 0.92)])];
        let g = generalization_bounds(&recs, Selector::PerDetector).unwrap();
        let ranks: Vec<f64> = g.bounds.iter().map(|b| b.mean_sq_rank.unwrap()).collect();
        assert_eq!(ranks, vec![3.0, 1.5, 1.5]);
        assert!((g.bounds[0].mse_aucroc - 100.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn selection_invariant_under_monotone_transform(vals in prop::collection::vec(0.01f64..0.99, 3), tests in prop::collection::vec(0.0f64..1.0, 3)) {
            let mk = |f: &dyn Fn(f64) -> f64| {
                let e: Vec<_> = [Knn, Lof, Xgb].iter().zip(vals.iter().zip(&tests)).map(|(&k, (&v, &t))| (k, f(v), t)).collect();
                generalization_bounds(&[record(0, RATE, &e)], Selector::BestByValidation).unwrap().selection
            };
            let a = mk(&|v| v);
            let b = mk(&|v: f64| v.powi(3) / 2.0);
            let pick = |s: &[SelectionRow]| s.iter().find(|r| r.basis == "validation").unwrap().detector.clone();
            prop_assert_eq!(pick(&a), pick(&b));
        }
    }
}
