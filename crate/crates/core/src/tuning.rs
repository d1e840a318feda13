//! Stratified k-fold planning and grid search by validation AUCROC.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::detectors::{self, DetectorSpec, HyperParams};
use crate::error::{Error, Result};
use crate::metrics::{self, ScoreSet};
use crate::seed;

pub const N_FOLDS: usize = 5;
/// Fewest faulty training examples for which cross-validation is run.
pub const MIN_FAULTY: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    n_folds: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// `(training indices, held-out indices)` of fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != f)
    }

    /// Faulty and total example counts per fold.
    pub fn fold_counts(&self, data: &LabeledDataset) -> Vec<(usize, usize)> {
        let mut counts = vec![(0, 0); self.n_folds];
        for (&f, l) in self.assignments.iter().zip(&data.labels) {
            counts[f].1 += 1;
            if l.is_faulty() {
                counts[f].0 += 1;
            }
        }
        counts
    }

    /// Checks that the plan covers `data` and that faulty and total counts
    /// are balanced to within one across folds.
    pub fn is_balanced(&self, data: &LabeledDataset) -> bool {
        if self.assignments.len() != data.len() || self.assignments.iter().any(|&f| f >= self.n_folds) {
            return false;
        }
        let counts = self.fold_counts(data);
        let spread = |v: &mut dyn Iterator<Item = usize>| {
            let v: Vec<usize> = v.collect();
            v.iter().max().unwrap_or(&0) - v.iter().min().unwrap_or(&0)
        };
        spread(&mut counts.iter().map(|c| c.0)) <= 1 && spread(&mut counts.iter().map(|c| c.1)) <= 1
    }
}

/// Deals shuffled faulty examples, then shuffled healthy ones, round-robin
/// into `k` folds.
pub fn plan_folds(train: &LabeledDataset, k: usize, seed_v: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    let required = MIN_FAULTY.max(k);
    let found = train.n_faulty();
    if found < required {
        return Err(Error::InsufficientAnomalies { found, required });
    }
    let mut rng = seed::stream(seed_v, "folds", 0);
    let (mut faulty, mut healthy): (Vec<usize>, Vec<usize>) =
        (0..train.len()).partition(|&i| train.labels[i].is_faulty());
    faulty.shuffle(&mut rng);
    healthy.shuffle(&mut rng);
    let mut assignments = vec![0; train.len()];
    for (p, i) in faulty.into_iter().chain(healthy).enumerate() {
        assignments[i] = p % k;
    }
    Ok(FoldPlan { n_folds: k, assignments })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub aucroc: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub detector: String,
    pub hyperparameters: HyperParams,
    pub validation_aucroc: f64,
    pub validation_fpr: f64,
    pub validation_fnr: f64,
    pub excluded_hp_count: usize,
    /// Held-out metrics of the chosen assignment, one entry per fold.
    pub folds: Vec<FoldMetrics>,
}

impl ValidationResult {
    pub fn mean_threshold(&self) -> f64 {
        self.folds.iter().map(|f| f.threshold).sum::<f64>() / self.folds.len() as f64
    }
}

fn evaluate_fold(spec: &DetectorSpec, hp: &HyperParams, train: &LabeledDataset, plan: &FoldPlan, f: usize, target_fpr: f64) -> Result<FoldMetrics> {
    let (fit_idx, held_idx) = plan.split(f);
    let model = detectors::fit(spec.kind, hp, &train.subset(&fit_idx))?;
    let held = train.subset(&held_idx);
    let (h, fa) = held.split_scores(&model.score(&held.points)?);
    let scores = ScoreSet::new(h, fa)?;
    let report = metrics::simple_predictor(&scores, target_fpr)?;
    Ok(FoldMetrics {
        aucroc: metrics::aucroc(&scores)?,
        fpr: report.achieved_fpr,
        fnr: report.achieved_fnr,
        threshold: report.threshold,
    })
}

/// Cross-validates every grid point and keeps the one with the highest mean
/// held-out AUCROC (first in grid order on ties). A grid point is dropped if
/// any of its folds fails.
pub fn grid_search(spec: &DetectorSpec, train: &LabeledDataset, plan: &FoldPlan, target_fpr: f64) -> Result<ValidationResult> {
    if plan.assignments.len() != train.len() {
        return Err(Error::InvalidConfig("fold plan does not match the training set".into()));
    }
    let k = plan.n_folds;
    let jobs: Vec<(usize, usize)> = (0..spec.grid.len()).flat_map(|g| (0..k).map(move |f| (g, f))).collect();
    let results: Vec<Result<FoldMetrics>> = jobs
        .par_iter()
        .map(|&(g, f)| evaluate_fold(spec, &spec.grid[g], train, plan, f, target_fpr))
        .collect();

    let mut best: Option<(usize, f64, Vec<FoldMetrics>)> = None;
    let mut excluded = 0;
    let mut last_error = None;
    for (g, chunk) in results.chunks(k).enumerate() {
        let mut folds = Vec::with_capacity(k);
        for r in chunk {
            match r {
                Ok(m) => folds.push(m.clone()),
                Err(e) => {
                    last_error = Some(e.to_string());
                    break;
                }
            }
        }
        if folds.len() < k {
            excluded += 1;
            continue;
        }
        let mean = folds.iter().map(|m| m.aucroc).sum::<f64>() / k as f64;
        if best.as_ref().is_none_or(|b| mean > b.1) {
            best = Some((g, mean, folds));
        }
    }
    let Some((g, auc, folds)) = best else {
        return Err(Error::DetectorFailed {
            detector: spec.name().to_string(),
            reason: format!("all {} hyperparameter assignments failed; last: {}", spec.grid.len(), last_error.unwrap_or_default()),
        });
    };
    let mean = |f: fn(&FoldMetrics) -> f64| folds.iter().map(f).sum::<f64>() / k as f64;
    Ok(ValidationResult {
        detector: spec.name().to_string(),
        hyperparameters: spec.grid[g].clone(),
        validation_aucroc: auc,
        validation_fpr: mean(|m| m.fpr),
        validation_fnr: mean(|m| m.fnr),
        excluded_hp_count: excluded,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Class, Points};
    use crate::detectors::DetectorKind;
    use proptest::prelude::*;

    fn dataset(n_h: usize, n_f: usize) -> LabeledDataset {
        let mut pts = Points::new(2);
        let mut labels = Vec::new();
        for i in 0..n_h + n_f {
            let faulty = i >= n_h;
            let base = if faulty { 3.0 } else { 0.0 };
            pts.push(&[base + ((i * 37) % 17) as f64 / 17.0, base + ((i * 11) % 13) as f64 / 13.0]).unwrap();
            labels.push(if faulty { Class::Faulty } else { Class::Healthy });
        }
        LabeledDataset::new(pts, labels, 0).unwrap()
    }

    #[test]
    fn fold_examples() {
        let d = dataset(990, 10);
        let p = plan_folds(&d, 5, 1).unwrap();
        assert!(p.fold_counts(&d).iter().all(|c| c.0 == 2));

        let d = dataset(993, 7);
        let mut faulty: Vec<usize> = plan_folds(&d, 5, 1).unwrap().fold_counts(&d).iter().map(|c| c.0).collect();
        faulty.sort();
        assert_eq!(faulty, vec![1, 1, 1, 2, 2]);

        let d = dataset(995, 5);
        assert!(plan_folds(&d, 5, 1).unwrap().fold_counts(&d).iter().all(|&c| c == (1, 200)));

        let d = dataset(100, 4);
        assert!(matches!(plan_folds(&d, 5, 1), Err(Error::InsufficientAnomalies { found: 4, required: 5 })));
    }

    proptest! {
        #[test]
        fn plans_are_balanced_partitions(n_h in 0usize..400, n_f in 5usize..60, seed_v in any::<u64>()) {
            let d = dataset(n_h, n_f);
            let p = plan_folds(&d, 5, seed_v).unwrap();
            prop_assert!(p.is_balanced(&d));
            let mut seen = vec![0usize; d.len()];
            for f in 0..5 {
                let (fit, held) = p.split(f);
                prop_assert_eq!(fit.len() + held.len(), d.len());
                for i in held {
                    seen[i] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            prop_assert_eq!(p, plan_folds(&d, 5, seed_v).unwrap());
        }
    }

    #[test]
    fn single_point_grid_averages_folds() {
        let d = dataset(200, 10);
        let plan = plan_folds(&d, 5, 3).unwrap();
        let spec = DetectorSpec::single(DetectorKind::Knn, HyperParams::new().with("n_neighbors", 3i64)).unwrap();
        let r = grid_search(&spec, &d, &plan, 0.01).unwrap();
        assert_eq!(r.folds.len(), 5);
        let mean = r.folds.iter().map(|f| f.aucroc).sum::<f64>() / 5.0;
        assert_eq!(r.validation_aucroc, mean);
        assert_eq!(r.excluded_hp_count, 0);
        assert_eq!(r, grid_search(&spec, &d, &plan, 0.01).unwrap());
    }

    #[test]
    fn failing_points_are_excluded_and_ties_keep_first() {
        let d = dataset(200, 10);
        let plan = plan_folds(&d, 5, 3).unwrap();
        let grid = vec![
            HyperParams::new().with("n_neighbors", 5000i64),
            HyperParams::new().with("n_neighbors", 3i64).with("contamination", 0.01),
            HyperParams::new().with("n_neighbors", 3i64),
        ];
        let spec = DetectorSpec::new(DetectorKind::Knn, grid).unwrap();
        let r = grid_search(&spec, &d, &plan, 0.01).unwrap();
        assert_eq!(r.excluded_hp_count, 1);
        assert_eq!(r.hyperparameters, spec.grid[1]);

        let spec = DetectorSpec::single(DetectorKind::Knn, HyperParams::new().with("n_neighbors", 5000i64)).unwrap();
        assert!(matches!(grid_search(&spec, &d, &plan, 0.01), Err(Error::DetectorFailed { .. })));
    }

    #[test]
    fn argmax_picks_better_grid_point() {
        let d = dataset(300, 15);
        let plan = plan_folds(&d, 5, 9).unwrap();
        let grid = vec![HyperParams::new().with("n_neighbors", 1i64), HyperParams::new().with("n_neighbors", 15i64)];
        let spec = DetectorSpec::new(DetectorKind::Knn, grid.clone()).unwrap();
        let r = grid_search(&spec, &d, &plan, 0.01).unwrap();
        let each: Vec<f64> = grid
            .iter()
            .map(|hp| grid_search(&DetectorSpec::single(DetectorKind::Knn, hp.clone()).unwrap(), &d, &plan, 0.01).unwrap().validation_aucroc)
            .collect();
        let best = if each[1] > each[0] { 1 } else { 0 };
        assert_eq!(r.hyperparameters, grid[best]);
        assert_eq!(r.validation_aucroc, each[best]);
    }
}
