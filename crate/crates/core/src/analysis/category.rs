//! Best-in-category test AUCROC per simulation.

use serde::{Deserialize, Serialize};

use super::{complete_groups, mann_whitney, GroupKey};
use crate::detectors::Category;
use crate::error::Result;
use crate::metrics::empirical_quantile;
use crate::pipeline::SimulationRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub category: Category,
    pub n_simulations: usize,
    pub mean: f64,
    pub p10: f64,
    pub p90: f64,
    /// Mann-Whitney p-value against the category with the highest mean;
    /// 1 for that category itself.
    pub p_value_vs_best: f64,
    pub maxima: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryGroup {
    pub key: GroupKey,
    pub categories: Vec<CategorySummary>,
}

impl CategoryGroup {
    pub fn get(&self, c: Category) -> Option<&CategorySummary> {
        self.categories.iter().find(|s| s.category == c)
    }

    pub fn best(&self) -> Option<Category> {
        self.categories.iter().max_by(|a, b| a.mean.total_cmp(&b.mean)).map(|s| s.category)
    }
}

/// For each group and each category present in the suite, the distribution
/// over simulations of the maximum test AUCROC among that category's detectors.
pub fn category_max(records: &[SimulationRecord]) -> Result<Vec<CategoryGroup>> {
    let mut out = Vec::new();
    for (key, rs) in complete_groups(records)? {
        let mut categories = Vec::new();
        for c in Category::ALL {
            let maxima: Vec<f64> = rs
                .iter()
                .filter_map(|r| {
                    r.detectors.iter().filter(|d| d.category == c).map(|d| d.test_aucroc).reduce(f64::max)
                })
                .collect();
            if maxima.is_empty() {
                continue;
            }
            categories.push(CategorySummary {
                category: c,
                n_simulations: maxima.len(),
                mean: maxima.iter().sum::<f64>() / maxima.len() as f64,
                p10: empirical_quantile(&maxima, 0.10)?,
                p90: empirical_quantile(&maxima, 0.90)?,
                p_value_vs_best: 1.0,
                maxima,
            });
        }
        let mut group = CategoryGroup { key, categories };
        if let Some(best) = group.best() {
            let reference = group.get(best).expect("present").maxima.clone();
            for s in group.categories.iter_mut().filter(|s| s.category != best) {
                s.p_value_vs_best = mann_whitney(&s.maxima, &reference)?.p_value;
            }
        }
        out.push(group);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fixtures::record;
    use crate::config::AnomalySetting;
    use crate::detectors::DetectorKind::{Knn, Lof, Svm, Xgbod};

    #[test]
    fn single_detector_category_is_its_auc() {
        let recs: Vec<_> = (0..3).map(|i| record(i, AnomalySetting::Count(10), &[(Knn, 0.9, 0.8 + 0.01 * i as f64), (Svm, 0.9, 0.7)])).collect();
        let g = &category_max(&recs).unwrap()[0];
        let us = g.get(Category::Unsupervised).unwrap();
        assert!(us.maxima.iter().zip([0.8, 0.81, 0.82]).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!((us.mean - 0.81).abs() < 1e-12);
        assert_eq!(g.get(Category::FullySupervised).unwrap().maxima, vec![0.7; 3]);
        assert!(g.get(Category::SemiSupervised).is_none());
        assert_eq!(g.best(), Some(Category::Unsupervised));
        assert_eq!(us.p_value_vs_best, 1.0);
    }

    #[test]
    fn dominant_detector_sets_the_max() {
        let recs: Vec<_> = (0..4)
            .map(|i| record(i, AnomalySetting::Count(60), &[(Knn, 0.9, 0.6), (Lof, 0.9, 0.9 - 0.01 * i as f64), (Xgbod, 0.9, 0.5)]))
            .collect();
        let g = &category_max(&recs).unwrap()[0];
        assert_eq!(g.get(Category::Unsupervised).unwrap().maxima, vec![0.9, 0.89, 0.88, 0.87]);
        assert!(g.get(Category::SemiSupervised).unwrap().p_value_vs_best < 0.05);
    }
}
