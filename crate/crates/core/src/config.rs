//! Experiment configuration file.
//!
//! A JSON document with a `schema_version` field. Unknown fields are rejected
//! and every error is reported with its line and column.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorKind, DetectorSpec, ParamGrid};
use crate::error::{Error, Result};
use crate::synth::ScenarioSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// A named scenario; `spec` may be omitted for the `S1` and `S2` presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ScenarioSpec>,
}

impl ScenarioEntry {
    pub fn preset(name: &str) -> Self {
        Self { name: name.to_string(), spec: None }
    }

    pub fn resolve(&self) -> Result<ScenarioSpec> {
        match &self.spec {
            Some(s) => Ok(s.clone()),
            None => ScenarioSpec::preset(&self.name)
                .ok_or_else(|| Error::InvalidConfig(format!("scenario {:?} has no spec and is not a preset", self.name))),
        }
    }
}

/// How many faulty training examples a simulation gets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum AnomalySetting {
    /// `round(rate * n_train)`
    Rate(f64),
    Count(usize),
}

impl AnomalySetting {
    pub fn faulty_count(self, n_train: usize) -> usize {
        match self {
            AnomalySetting::Rate(r) => (r * n_train as f64).round() as usize,
            AnomalySetting::Count(c) => c,
        }
    }

    pub fn mode(self) -> &'static str {
        match self {
            AnomalySetting::Rate(_) => "rate",
            AnomalySetting::Count(_) => "count",
        }
    }

    pub fn value_string(self) -> String {
        match self {
            AnomalySetting::Rate(r) => format!("{r}"),
            AnomalySetting::Count(c) => format!("{c}"),
        }
    }

    /// Directory label, e.g. `rate-0.005` or `count-10`.
    pub fn label(self) -> String {
        format!("{}-{}", self.mode(), self.value_string())
    }
}

impl fmt::Display for AnomalySetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub name: DetectorKind,
    /// Omitted: the detector's default benchmark grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<ParamGrid>,
}

impl DetectorConfig {
    pub fn to_spec(&self) -> Result<DetectorSpec> {
        match &self.grid {
            None => Ok(DetectorSpec::with_default_grid(self.name)),
            Some(g) => DetectorSpec::new(self.name, g.expand()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSetConfig {
    pub batches: usize,
    pub batch_size: usize,
    /// Share of faulty points in every batch.
    pub faulty_fraction: f64,
}

impl Default for TestSetConfig {
    fn default() -> Self {
        Self { batches: 40, batch_size: 1024, faulty_fraction: 0.5 }
    }
}

impl TestSetConfig {
    pub fn faulty_per_batch(&self) -> usize {
        (self.batch_size as f64 * self.faulty_fraction).round() as usize
    }
}

/// Where the test-time decision threshold comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdSource {
    /// Quantile of the test set's own healthy scores.
    #[default]
    Test,
    /// Mean of the per-fold validation thresholds of the chosen assignment.
    Validation,
}

fn default_target_fpr() -> f64 {
    0.01
}
fn default_parallelism() -> usize {
    1
}
fn default_jitter() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenarios: Vec<ScenarioEntry>,
    /// Nominal training-set sizes.
    pub sizes: Vec<usize>,
    #[serde(default = "default_jitter")]
    pub size_jitter: usize,
    pub anomalies: Vec<AnomalySetting>,
    pub repetitions: usize,
    pub detectors: Vec<DetectorConfig>,
    #[serde(default = "default_target_fpr")]
    pub target_fpr: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub test_set: TestSetConfig,
    #[serde(default)]
    pub threshold_source: ThresholdSource,
    /// Relative paths resolve against the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

/// `"<msg> at line 3 column 5"` -> `"<msg>"`
fn strip_location(msg: &str) -> &str {
    match msg.rfind(" at line ") {
        Some(i) => &msg[..i],
        None => msg,
    }
}

impl ExperimentConfig {
    /// Parses and validates; `origin` prefixes error locations.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            Error::InvalidConfig(format!("{origin}:{}:{}: {}", e.line(), e.column(), strip_location(&e.to_string())))
        })?;
        cfg.validate().map_err(|e| match e {
            Error::InvalidConfig(m) | Error::InvalidScenario(m) => Error::InvalidConfig(format!("{origin}: {m}")),
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.scenarios.is_empty() {
            return bad("scenarios: at least one required".into());
        }
        let mut names = HashSet::new();
        for s in &self.scenarios {
            let valid = !s.name.is_empty()
                && s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !valid {
                return bad(format!("scenario name {:?} must be nonempty ASCII letters, digits, '-' or '_'", s.name));
            }
            if !names.insert(s.name.as_str()) {
                return bad(format!("duplicate scenario {:?}", s.name));
            }
            s.resolve()?.validate().map_err(|e| Error::InvalidConfig(format!("scenario {:?}: {e}", s.name)))?;
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n <= self.size_jitter) {
            return bad(format!("sizes must be nonempty and each exceed size_jitter ({})", self.size_jitter));
        }
        if self.anomalies.is_empty() {
            return bad("anomalies: at least one setting required".into());
        }
        for a in &self.anomalies {
            match *a {
                AnomalySetting::Rate(r) if !(r > 0.0 && r < 1.0) => return bad(format!("anomaly rate {r} outside (0, 1)")),
                AnomalySetting::Count(0) => return bad("anomaly count must be positive".into()),
                _ => {}
            }
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive".into());
        }
        if self.detectors.is_empty() {
            return bad("detectors: at least one required".into());
        }
        let mut seen = HashSet::new();
        for d in &self.detectors {
            if !seen.insert(d.name) {
                return bad(format!("duplicate detector {}", d.name));
            }
            d.to_spec()?;
        }
        if !(self.target_fpr > 0.0 && self.target_fpr < 1.0) {
            return bad(format!("target_fpr {} outside (0, 1)", self.target_fpr));
        }
        let t = &self.test_set;
        if t.batches == 0 || t.batch_size == 0 {
            return bad("test_set batches and batch_size must be positive".into());
        }
        let nf = t.faulty_per_batch();
        if nf == 0 || nf >= t.batch_size {
            return bad(format!("test_set faulty_fraction {} leaves a class empty", t.faulty_fraction));
        }
        if self.parallelism == 0 {
            return bad("parallelism must be positive".into());
        }
        Ok(())
    }

    pub fn suite(&self) -> Result<Vec<DetectorSpec>> {
        self.detectors.iter().map(DetectorConfig::to_spec).collect()
    }
}
