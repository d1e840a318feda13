use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("shape mismatch: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient anomalies: found {found}, need at least {required}")]
    InsufficientAnomalies { found: usize, required: usize },

    #[error("detector {detector} failed: {reason}")]
    DetectorFailed { detector: String, reason: String },

    #[error(transparent)]
    Fit(#[from] FitError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Failure while fitting one detector at one hyperparameter assignment.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("fit of {detector} [{hyperparameters}] failed: {kind}")]
pub struct FitError {
    pub detector: String,
    pub hyperparameters: String,
    pub kind: FitErrorKind,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FitErrorKind {
    #[error("need {needed} training samples, have {available}")]
    TooFewSamples { needed: usize, available: usize },

    #[error("training data lacks class {0}")]
    MissingClass(&'static str),

    #[error("k-means left {0} cluster(s) empty")]
    EmptyCluster(usize),

    #[error("could not split clusters into large and small groups")]
    ClusterSplit,

    #[error("dual solver did not converge within {0} iterations")]
    NotConverged(usize),

    #[error("kernel matrix is degenerate: {0}")]
    SingularKernel(&'static str),

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("non-finite model output")]
    NonFinite,
}

impl FitError {
    pub(crate) fn new(detector: &str, hyperparameters: impl std::fmt::Display, kind: FitErrorKind) -> Self {
        Self {
            detector: detector.to_string(),
            hyperparameters: hyperparameters.to_string(),
            kind,
        }
    }
}
