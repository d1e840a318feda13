//! Detector roster behind one fit/score interface.
//!
//! Every fitted detector standardizes inputs with statistics of its full
//! training set. Unsupervised detectors then train on the healthy rows only;
//! the others see all rows with labels. Scores are oriented so that larger
//! means more anomalous.

pub mod cblof;
pub mod gbdt;
pub mod hyper;
pub mod iforest;
pub mod kernel;
pub mod kmeans;
pub mod knn;
pub mod lof;
pub mod neighbors;
pub mod ocsvm;
pub mod smo;
pub mod standardize;
pub mod svm;
pub mod xgbod;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use hyper::{HpValue, HyperParams, ParamGrid};
pub use standardize::Standardizer;

use crate::data::{Class, LabeledDataset, Points};
use crate::error::{Error, FitError, FitErrorKind, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "US")]
    Unsupervised,
    #[serde(rename = "SS")]
    SemiSupervised,
    #[serde(rename = "FS")]
    FullySupervised,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Unsupervised, Category::SemiSupervised, Category::FullySupervised];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Unsupervised => "US",
            Category::SemiSupervised => "SS",
            Category::FullySupervised => "FS",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Knn,
    Lof,
    Cblof,
    Iforest,
    Ocsvm,
    Svm,
    Xgb,
    Xgbod,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 8] = [
        DetectorKind::Cblof,
        DetectorKind::Iforest,
        DetectorKind::Knn,
        DetectorKind::Lof,
        DetectorKind::Ocsvm,
        DetectorKind::Xgbod,
        DetectorKind::Svm,
        DetectorKind::Xgb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Knn => "knn",
            DetectorKind::Lof => "lof",
            DetectorKind::Cblof => "cblof",
            DetectorKind::Iforest => "iforest",
            DetectorKind::Ocsvm => "ocsvm",
            DetectorKind::Svm => "svm",
            DetectorKind::Xgb => "xgb",
            DetectorKind::Xgbod => "xgbod",
        }
    }

    pub fn category(self) -> Category {
        match self {
            DetectorKind::Knn | DetectorKind::Lof | DetectorKind::Cblof | DetectorKind::Iforest | DetectorKind::Ocsvm => {
                Category::Unsupervised
            }
            DetectorKind::Xgbod => Category::SemiSupervised,
            DetectorKind::Svm | DetectorKind::Xgb => Category::FullySupervised,
        }
    }

    /// Hyperparameter names the detector understands. `contamination` is
    /// accepted everywhere and has no effect.
    pub fn known_keys(self) -> &'static [&'static str] {
        match self {
            DetectorKind::Knn | DetectorKind::Lof => &["n_neighbors", "contamination"],
            DetectorKind::Cblof => &["n_clusters", "random_state", "contamination"],
            DetectorKind::Iforest => &["n_estimators", "max_samples", "random_state", "contamination"],
            DetectorKind::Ocsvm => &["kernel", "gamma", "nu", "contamination"],
            DetectorKind::Svm => &["kernel", "gamma", "c", "class_weight", "break_ties", "contamination"],
            DetectorKind::Xgb => {
                &["n_estimators", "max_depth", "learning_rate", "reg_lambda", "min_child_weight", "random_state", "contamination"]
            }
            DetectorKind::Xgbod => &["random_state", "contamination"],
        }
    }

    /// The tuning grid used by the benchmark for this detector.
    pub fn default_grid(self) -> ParamGrid {
        let neighbors: Vec<HpValue> = [3i64, 5, 7]
            .into_iter()
            .map(HpValue::from)
            .chain(
                ["0.001N", "0.01N", "0.02N", "0.03N", "0.04N", "0.06N", "0.08N", "0.10N", "0.12N", "0.15N"]
                    .into_iter()
                    .map(HpValue::from),
            )
            .collect();
        let kernels = ["sigmoid", "rbf", "linear"];
        let gammas = ["auto", "scale"];
        match self {
            DetectorKind::Knn | DetectorKind::Lof => ParamGrid::new().with("n_neighbors", neighbors),
            DetectorKind::Cblof => ParamGrid::new().with("n_clusters", [4i64, 6, 8, 10, 12]),
            DetectorKind::Iforest => ParamGrid::new()
                .with("n_estimators", [50i64, 75, 100])
                .with(
                    "max_samples",
                    [HpValue::from("auto"), 0.5.into(), 0.7.into(), 0.8.into(), 0.9.into()],
                )
                .with("random_state", [0i64, 1, 2, 3, 4]),
            DetectorKind::Ocsvm => ParamGrid::new()
                .with("kernel", kernels)
                .with("gamma", gammas)
                .with("nu", [0.3, 0.5, 0.7, 0.9]),
            DetectorKind::Svm => ParamGrid::new()
                .with("kernel", kernels)
                .with("gamma", gammas)
                .with("c", [0.1, 0.3, 0.5, 0.7, 1.0, 1.2, 1.5, 1.7, 2.0]),
            DetectorKind::Xgb => ParamGrid::new(),
            DetectorKind::Xgbod => ParamGrid::new().with("random_state", [1i64, 2, 3, 4, 5]),
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown detector {s:?}")))
    }
}

/// A detector and the hyperparameter assignments to tune over.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec {
    pub kind: DetectorKind,
    pub grid: Vec<HyperParams>,
}

impl DetectorSpec {
    pub fn new(kind: DetectorKind, grid: Vec<HyperParams>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidConfig(format!("{kind}: empty hyperparameter grid")));
        }
        for hp in &grid {
            if let Some(k) = hp.0.keys().find(|k| !kind.known_keys().contains(&k.as_str())) {
                return Err(Error::InvalidConfig(format!("{kind}: unknown hyperparameter {k:?}")));
            }
        }
        Ok(Self { kind, grid })
    }

    pub fn with_default_grid(kind: DetectorKind) -> Self {
        Self { kind, grid: kind.default_grid().expand() }
    }

    pub fn single(kind: DetectorKind, hp: HyperParams) -> Result<Self> {
        Self::new(kind, vec![hp])
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn category(&self) -> Category {
        self.kind.category()
    }
}

/// The full benchmark suite with the default grids.
pub fn default_suite() -> Vec<DetectorSpec> {
    DetectorKind::ALL.into_iter().map(DetectorSpec::with_default_grid).collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Knn(knn::KnnModel),
    Lof(lof::LofModel),
    Cblof(cblof::CblofModel),
    Iforest(iforest::IsolationForest),
    Ocsvm(ocsvm::OcsvmModel),
    Svm(svm::SvmModel),
    Xgb(gbdt::Booster),
    Xgbod(xgbod::XgbodModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedDetector {
    kind: DetectorKind,
    hyperparameters: HyperParams,
    standardizer: Standardizer,
    model: Model,
}

fn max_samples(hp: &HyperParams) -> std::result::Result<iforest::MaxSamples, FitErrorKind> {
    match hp.get("max_samples") {
        None => Ok(iforest::MaxSamples::Auto),
        Some(HpValue::Text(t)) if t == "auto" => Ok(iforest::MaxSamples::Auto),
        Some(HpValue::Float(f)) => Ok(iforest::MaxSamples::Fraction(*f)),
        Some(v) => Err(FitErrorKind::InvalidHyperparameter(format!("max_samples={v}"))),
    }
}

fn boost_params(hp: &HyperParams) -> std::result::Result<gbdt::BoostParams, FitErrorKind> {
    let d = gbdt::BoostParams::default();
    Ok(gbdt::BoostParams {
        rounds: hp.usize_or("n_estimators", d.rounds)?,
        max_depth: hp.usize_or("max_depth", d.max_depth)?,
        eta: hp.f64_or("learning_rate", d.eta)?,
        lambda: hp.f64_or("reg_lambda", d.lambda)?,
        min_child_weight: hp.f64_or("min_child_weight", d.min_child_weight)?,
    })
}

fn fit_model(kind: DetectorKind, hp: &HyperParams, x: &Points, labels: &[Class], n_total: usize) -> std::result::Result<Model, FitErrorKind> {
    for k in hp.0.keys() {
        if !kind.known_keys().contains(&k.as_str()) {
            return Err(FitErrorKind::InvalidHyperparameter(format!("unknown key {k}")));
        }
    }
    // One-class training set for the unsupervised roster.
    let healthy = || {
        let idx: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i].is_faulty()).collect();
        x.select(&idx)
    };
    let needs_both = || -> std::result::Result<(), FitErrorKind> {
        if !labels.iter().any(|l| l.is_faulty()) {
            return Err(FitErrorKind::MissingClass("faulty"));
        }
        if labels.iter().all(|l| l.is_faulty()) {
            return Err(FitErrorKind::MissingClass("healthy"));
        }
        Ok(())
    };
    Ok(match kind {
        DetectorKind::Knn => Model::Knn(knn::KnnModel::fit(healthy(), hp.neighbors("n_neighbors", 5, n_total)?)?),
        DetectorKind::Lof => Model::Lof(lof::LofModel::fit(healthy(), hp.neighbors("n_neighbors", 20, n_total)?)?),
        DetectorKind::Cblof => Model::Cblof(cblof::CblofModel::fit(
            &healthy(),
            hp.usize_or("n_clusters", 8)?,
            hp.u64_or("random_state", 0)?,
        )?),
        DetectorKind::Iforest => Model::Iforest(iforest::IsolationForest::fit(
            &healthy(),
            hp.usize_or("n_estimators", 100)?,
            max_samples(hp)?,
            hp.u64_or("random_state", 0)?,
        )?),
        DetectorKind::Ocsvm => {
            let h = healthy();
            let kernel = kernel::Kernel::from_names(hp.text_or("kernel", "rbf")?, hp.text_or("gamma", "scale")?, &h)?;
            Model::Ocsvm(ocsvm::OcsvmModel::fit(&h, kernel, hp.f64_or("nu", 0.5)?)?)
        }
        DetectorKind::Svm => {
            needs_both()?;
            if let Some(w) = hp.get("class_weight") {
                if *w != HpValue::from("balanced") {
                    return Err(FitErrorKind::InvalidHyperparameter(format!("class_weight={w}")));
                }
            }
            let kernel = kernel::Kernel::from_names(hp.text_or("kernel", "rbf")?, hp.text_or("gamma", "scale")?, x)?;
            Model::Svm(svm::SvmModel::fit(x, labels, kernel, hp.f64_or("c", 1.0)?)?)
        }
        DetectorKind::Xgb => {
            needs_both()?;
            Model::Xgb(gbdt::Booster::fit(x, labels, &boost_params(hp)?)?)
        }
        DetectorKind::Xgbod => {
            needs_both()?;
            Model::Xgbod(xgbod::XgbodModel::fit(x, labels, hp.u64_or("random_state", 0)?, &gbdt::BoostParams::default())?)
        }
    })
}

/// Fits `kind` at `hp` on `train`. Errors carry the detector and assignment.
pub fn fit(kind: DetectorKind, hp: &HyperParams, train: &LabeledDataset) -> std::result::Result<FittedDetector, FitError> {
    let wrap = |k: FitErrorKind| FitError::new(kind.name(), hp, k);
    if train.is_empty() {
        return Err(wrap(FitErrorKind::TooFewSamples { needed: 1, available: 0 }));
    }
    let standardizer = Standardizer::fit(&train.points).map_err(|_| wrap(FitErrorKind::NonFinite))?;
    let x = standardizer.transform(&train.points).map_err(|_| wrap(FitErrorKind::NonFinite))?;
    let model = fit_model(kind, hp, &x, &train.labels, train.len()).map_err(wrap)?;
    Ok(FittedDetector { kind, hyperparameters: hp.clone(), standardizer, model })
}

impl FittedDetector {
    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn hyperparameters(&self) -> &HyperParams {
        &self.hyperparameters
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    /// One score per row; larger is more anomalous.
    pub fn score(&self, points: &Points) -> Result<Vec<f64>> {
        let x = self.standardizer.transform(points)?;
        let s = match &self.model {
            Model::Knn(m) => m.score(&x),
            Model::Lof(m) => m.score(&x),
            Model::Cblof(m) => m.score(&x),
            Model::Iforest(m) => m.score(&x),
            Model::Ocsvm(m) => m.score(&x),
            Model::Svm(m) => m.score(&x),
            Model::Xgb(m) => m.margin(&x),
            Model::Xgbod(m) => m.score(&x),
        };
        if s.iter().any(|v| !v.is_finite()) {
            return Err(FitError::new(self.kind.name(), &self.hyperparameters, FitErrorKind::NonFinite).into());
        }
        Ok(s)
    }
}
