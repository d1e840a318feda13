//! Per-simulation results and their flat CSV form.

use serde::{Deserialize, Serialize};

use crate::config::{AnomalySetting, ThresholdSource};
use crate::detectors::{Category, HyperParams};
use crate::synth::ScenarioSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum Status {
    Complete,
    Excluded { reason: String },
}

impl Status {
    pub fn is_complete(&self) -> bool {
        matches!(self, Status::Complete)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorResult {
    pub detector: String,
    pub category: Category,
    pub hyperparameters: HyperParams,
    pub excluded_hp_count: usize,
    pub validation_aucroc: f64,
    pub validation_fpr: f64,
    pub validation_fnr: f64,
    pub test_aucroc: f64,
    pub test_fpr: f64,
    pub test_fnr: f64,
    pub test_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthResult {
    pub aucroc: f64,
    pub fpr: f64,
    pub fnr: f64,
    /// Set when a preset scenario's AUCROC leaves [0.985, 0.995].
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub scenario: String,
    pub scenario_spec: ScenarioSpec,
    pub n_train_nominal: usize,
    pub anomaly: AnomalySetting,
    pub simulation_index: usize,
    pub master_seed: u64,
    pub seed: u64,
    pub target_fpr: f64,
    pub threshold_source: ThresholdSource,
    /// Realised sizes; zero when excluded before sampling.
    pub n_train: usize,
    pub n_faulty: usize,
    pub n_test: usize,
    pub status: Status,
    /// Empty unless complete.
    pub detectors: Vec<DetectorResult>,
    pub ground_truth: Option<GroundTruthResult>,
}

impl SimulationRecord {
    pub fn detector(&self, name: &str) -> Option<&DetectorResult> {
        self.detectors.iter().find(|d| d.detector == name)
    }
}

/// Column order of the consolidated CSV.
pub const CSV_COLUMNS: [&str; 27] = [
    "scenario",
    "n_train_nominal",
    "anomaly_mode",
    "anomaly_value",
    "simulation_index",
    "seed",
    "n_train",
    "n_faulty",
    "status",
    "exclusion_reason",
    "detector",
    "category",
    "hyperparameters",
    "excluded_hp_count",
    "validation_aucroc",
    "validation_fpr",
    "validation_fnr",
    "test_aucroc",
    "test_fpr",
    "test_fnr",
    "test_threshold",
    "gt_aucroc",
    "gt_fpr",
    "gt_fnr",
    "gt_flagged",
    "target_fpr",
    "threshold_source",
];

fn num(v: f64) -> String {
    format!("{v}")
}

/// One row per detector; an excluded simulation yields a single row with the
/// detector columns empty.
pub fn csv_rows(r: &SimulationRecord) -> Vec<Vec<String>> {
    let (status, reason) = match &r.status {
        Status::Complete => ("complete".to_string(), String::new()),
        Status::Excluded { reason } => ("excluded".to_string(), reason.clone()),
    };
    let head = vec![
        r.scenario.clone(),
        r.n_train_nominal.to_string(),
        r.anomaly.mode().to_string(),
        r.anomaly.value_string(),
        r.simulation_index.to_string(),
        r.seed.to_string(),
        r.n_train.to_string(),
        r.n_faulty.to_string(),
        status,
        reason,
    ];
    let gt: Vec<String> = match &r.ground_truth {
        Some(g) => vec![num(g.aucroc), num(g.fpr), num(g.fnr), g.flagged.to_string()],
        None => vec![String::new(); 4],
    };
    let tail = vec![
        num(r.target_fpr),
        match r.threshold_source {
            ThresholdSource::Test => "test".into(),
            ThresholdSource::Validation => "validation".into(),
        },
    ];
    let detector_cols = |d: Option<&DetectorResult>| -> Vec<String> {
        match d {
            Some(d) => vec![
                d.detector.clone(),
                d.category.to_string(),
                d.hyperparameters.to_string(),
                d.excluded_hp_count.to_string(),
                num(d.validation_aucroc),
                num(d.validation_fpr),
                num(d.validation_fnr),
                num(d.test_aucroc),
                num(d.test_fpr),
                num(d.test_fnr),
                num(d.test_threshold),
            ],
            None => vec![String::new(); 11],
        }
    };
    let build = |d: Option<&DetectorResult>| [head.clone(), detector_cols(d), gt.clone(), tail.clone()].concat();
    if r.detectors.is_empty() {
        vec![build(None)]
    } else {
        r.detectors.iter().map(|d| build(Some(d))).collect()
    }
}
