//! Boosting on raw features augmented with unsupervised outlier scores.
//!
//! The score bank: kNN and LOF at k in {3, ceil(0.01 N), ceil(0.05 N)},
//! an isolation forest of 100 trees, CBLOF with 8 clusters and an RBF
//! one-class SVM with nu = 0.5. The bank's CBLOF treats every cluster as
//! large when no large/small split exists. Every bank member is fitted on all training
//! rows; training rows get leave-self-out neighbour scores. Bank columns are
//! standardized before being appended to the features.

use rayon::prelude::*;

use super::cblof::CblofModel;
use super::gbdt::{BoostParams, Booster};
use super::hyper::resolve_fraction_of_n;
use super::iforest::{IsolationForest, MaxSamples};
use super::kernel::Kernel;
use super::lof::{training_neighbors, LofModel};
use super::neighbors::NeighborIndex;
use super::ocsvm::OcsvmModel;
use super::standardize::Standardizer;
use crate::data::{Class, Points};
use crate::error::FitErrorKind;

pub const BANK_NEIGHBORS: [&str; 3] = ["3", "0.01N", "0.05N"];
pub const BANK_TREES: usize = 100;
pub const BANK_CLUSTERS: usize = 8;
pub const BANK_NU: f64 = 0.5;
pub const BANK_WIDTH: usize = 9;

pub fn bank_neighbor_counts(n: usize) -> Vec<usize> {
    BANK_NEIGHBORS
        .iter()
        .map(|s| s.parse().ok().or_else(|| resolve_fraction_of_n(s, n)).expect("static bank spec"))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
struct Bank {
    index: NeighborIndex,
    ks: Vec<usize>,
    lofs: Vec<LofModel>,
    iforest: IsolationForest,
    cblof: CblofModel,
    ocsvm: OcsvmModel,
}

impl Bank {
    fn fit(x: &Points, seed: u64) -> Result<(Self, Points), FitErrorKind> {
        let n = x.len();
        let ks = bank_neighbor_counts(n);
        let kmax = *ks.iter().max().expect("nonempty");
        if kmax >= n {
            return Err(FitErrorKind::TooFewSamples { needed: kmax + 1, available: n });
        }
        let index = NeighborIndex::new(x.clone());
        let neigh = training_neighbors(&index, kmax);
        let lofs: Vec<LofModel> = ks.iter().map(|&k| LofModel::from_neighbors(index.clone(), k, &neigh)).collect();
        let iforest = IsolationForest::fit(x, BANK_TREES, MaxSamples::Auto, seed)?;
        let cblof = CblofModel::fit_lenient(x, BANK_CLUSTERS, seed)?;
        let ocsvm = OcsvmModel::fit(x, Kernel::from_names("rbf", "auto", x)?, BANK_NU)?;

        let forest = iforest.score(x);
        let clusters = cblof.score(x);
        let svm = ocsvm.score(x);
        let mut feats = Points::with_capacity(BANK_WIDTH, n);
        let mut row = Vec::with_capacity(BANK_WIDTH);
        for i in 0..n {
            row.clear();
            row.extend(ks.iter().map(|&k| neigh[i][k - 1].0));
            row.extend(lofs.iter().map(|m| m.training_scores()[i]));
            row.extend([forest[i], clusters[i], svm[i]]);
            feats.push(&row).expect("bank width");
        }
        Ok((Self { index, ks, lofs, iforest, cblof, ocsvm }, feats))
    }

    fn transform(&self, x: &Points) -> Points {
        let kmax = *self.ks.iter().max().expect("nonempty");
        let neigh: Vec<Vec<(f64, usize)>> = x
            .as_flat()
            .par_chunks(x.dim().max(1))
            .map_init(Vec::new, |buf, q| self.index.k_nearest(q, kmax, None, buf))
            .collect();
        let forest = self.iforest.score(x);
        let clusters = self.cblof.score(x);
        let svm = self.ocsvm.score(x);
        let mut feats = Points::with_capacity(BANK_WIDTH, x.len());
        let mut row = Vec::with_capacity(BANK_WIDTH);
        for (i, nb) in neigh.iter().enumerate() {
            row.clear();
            row.extend(self.ks.iter().map(|&k| nb[k - 1].0));
            row.extend(self.lofs.iter().map(|m| m.score_neighbors(nb)));
            row.extend([forest[i], clusters[i], svm[i]]);
            feats.push(&row).expect("bank width");
        }
        feats
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XgbodModel {
    bank: Bank,
    bank_scaler: Standardizer,
    booster: Booster,
}

impl XgbodModel {
    pub fn fit(x: &Points, labels: &[Class], seed: u64, params: &BoostParams) -> Result<Self, FitErrorKind> {
        let (bank, raw) = Bank::fit(x, seed)?;
        let bank_scaler = Standardizer::fit(&raw).map_err(|_| FitErrorKind::NonFinite)?;
        let aug = x.hstack(&bank_scaler.transform(&raw).map_err(|_| FitErrorKind::NonFinite)?).map_err(|_| FitErrorKind::NonFinite)?;
        if aug.as_flat().iter().any(|v| !v.is_finite()) {
            return Err(FitErrorKind::NonFinite);
        }
        let booster = Booster::fit(&aug, labels, params)?;
        Ok(Self { bank, bank_scaler, booster })
    }

    pub fn score(&self, x: &Points) -> Vec<f64> {
        let raw = self.bank.transform(x);
        let scaled = self.bank_scaler.transform(&raw).expect("bank width");
        self.booster.margin(&x.hstack(&scaled).expect("same length"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_counts_round_up() {
        assert_eq!(bank_neighbor_counts(1000), vec![3, 10, 50]);
        assert_eq!(bank_neighbor_counts(998), vec![3, 10, 50]);
        assert_eq!(bank_neighbor_counts(50), vec![3, 1, 3]);
    }

    #[test]
    fn bank_transform_matches_direct_models() {
        let rows: Vec<[f64; 2]> = (0..120).map(|i| [((i * 37) % 23) as f64 * 0.1, ((i * 11) % 19) as f64 * 0.1]).collect();
        let x = Points::from_rows(2, &rows).unwrap();
        let (bank, _) = Bank::fit(&x, 4).unwrap();
        let q = Points::from_rows(2, &[[0.3, 0.4], [5.0, -2.0]]).unwrap();
        let feats = bank.transform(&q);
        for (c, &k) in bank.ks.iter().enumerate() {
            let knn = super::super::knn::KnnModel::fit(x.clone(), k).unwrap().score(&q);
            let lof = LofModel::fit(x.clone(), k).unwrap().score(&q);
            for i in 0..2 {
                assert_eq!(feats.row(i)[c], knn[i]);
                assert!((feats.row(i)[3 + c] - lof[i]).abs() < 1e-12);
            }
        }
    }
}
