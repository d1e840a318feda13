//! Monte-Carlo benchmark for anomaly detectors under extreme class imbalance.
//!
//! The crate generates two-class "TvS" synthetic data with known densities
//! (a three-mode healthy Gaussian mixture against a faulty mixture spread on a
//! hypersphere shell), scores it with the Bayes-optimal log-density ratio, and
//! runs a roster of classical detectors through seeded cross-validated
//! simulations. Aggregation helpers turn the resulting records into rank,
//! critical-difference, category and generalization tables.
//!
//! Module map:
//!
//! * [`synth`] - scenario parameters, mixture densities and sampling
//! * [`oracle`] - ground-truth scoring and Monte-Carlo ideal metrics
//! * [`metrics`] - quantile thresholds, AUCROC, FPR/FNR trade-off
//! * [`detectors`] - kNN, LOF, CBLOF, IForest, OCSVM, SVM, XGB, XGBOD
//! * [`tuning`] - stratified folds and grid search
//! * [`pipeline`] - simulations, sweeps and the record store
//! * [`analysis`] - ranks, critical differences, category maxima, bounds
//! * [`config`] - the experiment configuration file

pub mod analysis;
pub mod config;
pub mod data;
pub mod detectors;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod seed;
pub mod synth;
pub mod tuning;

pub use data::{Class, LabeledDataset, Points};
pub use error::{Error, FitError, FitErrorKind, Result};
