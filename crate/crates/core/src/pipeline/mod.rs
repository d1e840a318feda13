//! Simulation runs and experiment sweeps.
//!
//! One simulation draws a jittered training set, cross-validates every
//! detector, refits each at its chosen assignment on the full training set
//! and evaluates on a fresh balanced test set that the ground-truth scorer
//! also sees. Any failure excludes the whole simulation.

pub mod record;
pub mod store;

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

pub use record::{DetectorResult, GroundTruthResult, SimulationRecord, Status};
pub use store::{Coordinate, Timing};

use crate::config::{AnomalySetting, ExperimentConfig, TestSetConfig, ThresholdSource};
use crate::data::{Class, LabeledDataset};
use crate::detectors::{self, DetectorSpec};
use crate::error::{Error, Result};
use crate::metrics::{self, ScoreSet};
use crate::oracle;
use crate::seed;
use crate::synth::{self, ScenarioSpec, TvsDistribution};
use crate::tuning::{self, MIN_FAULTY, N_FOLDS};

/// Accepted ground-truth AUCROC band for the preset scenarios.
pub const GT_AUC_BAND: (f64, f64) = (0.985, 0.995);

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub scenario_name: String,
    pub scenario: ScenarioSpec,
    pub n_train_nominal: usize,
    pub size_jitter: usize,
    pub anomaly: AnomalySetting,
    pub test_set: TestSetConfig,
    pub target_fpr: f64,
    pub threshold_source: ThresholdSource,
    pub simulation_index: usize,
    pub master_seed: u64,
}

impl SimulationConfig {
    /// Defaults of the benchmark: jitter 2, 40 x 1024 balanced test points,
    /// 1% target FPR, thresholds from the test set.
    pub fn new(scenario_name: &str, scenario: ScenarioSpec, n_train: usize, anomaly: AnomalySetting, index: usize, master_seed: u64) -> Self {
        Self {
            scenario_name: scenario_name.to_string(),
            scenario,
            n_train_nominal: n_train,
            size_jitter: 2,
            anomaly,
            test_set: TestSetConfig::default(),
            target_fpr: 0.01,
            threshold_source: ThresholdSource::Test,
            simulation_index: index,
            master_seed,
        }
    }

    pub fn coordinate(&self) -> Coordinate {
        Coordinate {
            scenario: self.scenario_name.clone(),
            n_train_nominal: self.n_train_nominal,
            anomaly: self.anomaly,
            simulation_index: self.simulation_index,
        }
    }

    /// Seed of this simulation, a hash of the master seed and its coordinates.
    pub fn seed(&self) -> u64 {
        let scenario = seed::derive_seed(self.master_seed, &format!("scenario/{}", self.scenario_name), 0);
        let value = match self.anomaly {
            AnomalySetting::Rate(r) => r.to_bits(),
            AnomalySetting::Count(c) => c as u64,
        };
        seed::derive_path(
            scenario,
            &[
                ("size", self.n_train_nominal as u64),
                (self.anomaly.mode(), value),
                ("simulation", self.simulation_index as u64),
            ],
        )
    }
}

/// Training set of one simulation: healthy rows first, then faulty.
pub fn draw_training_set(dist: &TvsDistribution, n_healthy: usize, n_faulty: usize, sim_seed: u64) -> Result<LabeledDataset> {
    let h = synth::sample(dist, Class::Healthy, n_healthy, seed::derive_seed(sim_seed, "train-healthy", 0));
    let f = synth::sample(dist, Class::Faulty, n_faulty, seed::derive_seed(sim_seed, "train-faulty", 0));
    h.concat(&f)
}

/// Test set of one simulation, batch by batch, each batch healthy then faulty.
pub fn draw_test_set(dist: &TvsDistribution, test: &TestSetConfig, sim_seed: u64) -> Result<LabeledDataset> {
    let nf = test.faulty_per_batch();
    let nh = test.batch_size - nf;
    let batches: Vec<LabeledDataset> = (0..test.batches)
        .into_par_iter()
        .map(|b| {
            let h = synth::sample(dist, Class::Healthy, nh, seed::derive_seed(sim_seed, "test-healthy", b as u64));
            let f = synth::sample(dist, Class::Faulty, nf, seed::derive_seed(sim_seed, "test-faulty", b as u64));
            h.concat(&f).expect("same dimension")
        })
        .collect();
    let mut out = LabeledDataset::new(crate::data::Points::new(dist.dim()), Vec::new(), sim_seed)?;
    for b in &batches {
        out = out.concat(b)?;
    }
    Ok(out)
}

fn is_preset(spec: &ScenarioSpec) -> bool {
    *spec == ScenarioSpec::s1() || *spec == ScenarioSpec::s2()
}

struct Outcome {
    n_train: usize,
    n_faulty: usize,
    n_test: usize,
    detectors: Vec<DetectorResult>,
    ground_truth: Option<GroundTruthResult>,
    timings: Vec<(String, f64)>,
}

fn simulate(cfg: &SimulationConfig, suite: &[DetectorSpec], sim_seed: u64, out: &mut Outcome) -> Result<()> {
    let dist = synth::build_tvs(&cfg.scenario)?;
    let j = cfg.size_jitter as i64;
    let jitter = seed::stream(sim_seed, "jitter", 0).random_range(-j..=j);
    let n_train = (cfg.n_train_nominal as i64 + jitter).max(0) as usize;
    let n_faulty = cfg.anomaly.faulty_count(n_train);
    out.n_train = n_train;
    out.n_faulty = n_faulty;
    if n_faulty < MIN_FAULTY {
        return Err(Error::InsufficientAnomalies { found: n_faulty, required: MIN_FAULTY });
    }
    if n_faulty >= n_train {
        return Err(Error::InvalidConfig(format!("{n_faulty} faulty examples leave no healthy ones in {n_train}")));
    }
    let train = draw_training_set(&dist, n_train - n_faulty, n_faulty, sim_seed)?;
    let plan = tuning::plan_folds(&train, N_FOLDS, seed::derive_seed(sim_seed, "folds", 0))?;
    let test = draw_test_set(&dist, &cfg.test_set, sim_seed)?;
    out.n_test = test.len();

    let (gh, gf) = test.split_scores(&oracle::gt_scores(&dist, &test.points)?);
    let gt_scores = ScoreSet::new(gh, gf)?;
    let gt_report = metrics::simple_predictor(&gt_scores, cfg.target_fpr)?;
    let gt_auc = metrics::aucroc(&gt_scores)?;
    let flagged = is_preset(&cfg.scenario) && !(GT_AUC_BAND.0..=GT_AUC_BAND.1).contains(&gt_auc);

    for spec in suite {
        let started = Instant::now();
        let val = tuning::grid_search(spec, &train, &plan, cfg.target_fpr)?;
        let model = detectors::fit(spec.kind, &val.hyperparameters, &train)?;
        let (h, f) = test.split_scores(&model.score(&test.points)?);
        let scores = ScoreSet::new(h, f)?;
        let threshold = match cfg.threshold_source {
            ThresholdSource::Test => metrics::threshold_for_fpr(&scores.healthy, cfg.target_fpr)?,
            ThresholdSource::Validation => val.mean_threshold(),
        };
        out.detectors.push(DetectorResult {
            detector: spec.name().to_string(),
            category: spec.category(),
            hyperparameters: val.hyperparameters.clone(),
            excluded_hp_count: val.excluded_hp_count,
            validation_aucroc: val.validation_aucroc,
            validation_fpr: val.validation_fpr,
            validation_fnr: val.validation_fnr,
            test_aucroc: metrics::aucroc(&scores)?,
            test_fpr: metrics::fpr_at_threshold(&scores.healthy, threshold)?,
            test_fnr: metrics::fnr_at_threshold(&scores.faulty, threshold)?,
            test_threshold: threshold,
        });
        out.timings.push((spec.name().to_string(), started.elapsed().as_secs_f64()));
    }
    out.ground_truth = Some(GroundTruthResult { aucroc: gt_auc, fpr: gt_report.achieved_fpr, fnr: gt_report.achieved_fnr, flagged });
    Ok(())
}

fn exclusion_reason(e: &Error) -> String {
    match e {
        Error::InsufficientAnomalies { found, required } => {
            format!("insufficient-anomalies: {found} faulty training examples, need {required}")
        }
        other => other.to_string(),
    }
}

/// Runs one simulation. Failures become an excluded record rather than an
/// error; the timing is kept apart so records stay reproducible.
pub fn run_simulation(cfg: &SimulationConfig, suite: &[DetectorSpec]) -> (SimulationRecord, Timing) {
    let started = Instant::now();
    let sim_seed = cfg.seed();
    let mut out = Outcome { n_train: 0, n_faulty: 0, n_test: 0, detectors: Vec::new(), ground_truth: None, timings: Vec::new() };
    let status = if suite.is_empty() {
        Status::Excluded { reason: "empty detector suite".into() }
    } else {
        match simulate(cfg, suite, sim_seed, &mut out) {
            Ok(()) => Status::Complete,
            Err(e) => Status::Excluded { reason: exclusion_reason(&e) },
        }
    };
    let complete = status.is_complete();
    let record = SimulationRecord {
        scenario: cfg.scenario_name.clone(),
        scenario_spec: cfg.scenario.clone(),
        n_train_nominal: cfg.n_train_nominal,
        anomaly: cfg.anomaly,
        simulation_index: cfg.simulation_index,
        master_seed: cfg.master_seed,
        seed: sim_seed,
        target_fpr: cfg.target_fpr,
        threshold_source: cfg.threshold_source,
        n_train: out.n_train,
        n_faulty: out.n_faulty,
        n_test: if complete { out.n_test } else { 0 },
        status,
        detectors: if complete { out.detectors } else { Vec::new() },
        ground_truth: if complete { out.ground_truth } else { None },
    };
    let timing = Timing { total_seconds: started.elapsed().as_secs_f64(), detector_seconds: out.timings };
    (record, timing)
}

/// All simulations of a sweep, in scenario, size, anomaly, repetition order.
pub fn expand(exp: &ExperimentConfig) -> Result<Vec<SimulationConfig>> {
    let mut out = Vec::new();
    for s in &exp.scenarios {
        let spec = s.resolve()?;
        for &n in &exp.sizes {
            for &a in &exp.anomalies {
                for rep in 0..exp.repetitions {
                    out.push(SimulationConfig {
                        scenario_name: s.name.clone(),
                        scenario: spec.clone(),
                        n_train_nominal: n,
                        size_jitter: exp.size_jitter,
                        anomaly: a,
                        test_set: exp.test_set,
                        target_fpr: exp.target_fpr,
                        threshold_source: exp.threshold_source,
                        simulation_index: rep,
                        master_seed: exp.master_seed,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub complete: usize,
    pub excluded: usize,
    pub skipped: usize,
}

/// Runs a sweep into `root` on `exp.parallelism` threads and rebuilds the
/// consolidated CSV. With `resume`, coordinates that already have a record
/// are skipped. `progress` sees each record as it is written.
pub fn run_experiment(
    exp: &ExperimentConfig,
    root: &Path,
    resume: bool,
    progress: &(dyn Fn(&Coordinate, &SimulationRecord) + Sync),
) -> Result<RunSummary> {
    exp.validate()?;
    let suite = exp.suite()?;
    let sims = expand(exp)?;
    std::fs::create_dir_all(root)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(exp.parallelism)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<Option<bool>>> = pool.install(|| {
        sims.par_iter()
            .map(|cfg| {
                let coord = cfg.coordinate();
                if resume && coord.record_path(root).is_file() {
                    return Ok(None);
                }
                let (record, timing) = run_simulation(cfg, &suite);
                store::write_record(root, &coord, &record, Some(&timing))?;
                progress(&coord, &record);
                Ok(Some(record.status.is_complete()))
            })
            .collect()
    });
    let mut summary = RunSummary::default();
    for o in outcomes {
        match o? {
            None => summary.skipped += 1,
            Some(true) => summary.complete += 1,
            Some(false) => summary.excluded += 1,
        }
    }
    store::write_consolidated(root)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{DetectorKind, HyperParams};

    fn toy() -> ScenarioSpec {
        ScenarioSpec { d: 2, mu: 2.8, sigma2_a: 0.05, sigma2_b: 0.4, n_clusters: 20, placement_seed: 0 }
    }

    fn small(cfg: &mut SimulationConfig) {
        cfg.test_set = TestSetConfig { batches: 2, batch_size: 256, faulty_fraction: 0.5 };
    }

    fn knn_suite() -> Vec<DetectorSpec> {
        vec![DetectorSpec::single(DetectorKind::Knn, HyperParams::new().with("n_neighbors", 5i64)).unwrap()]
    }

    #[test]
    fn too_few_anomalies_excluded_up_front() {
        let mut cfg = SimulationConfig::new("toy", toy(), 200, AnomalySetting::Count(4), 0, 1);
        small(&mut cfg);
        let (r, _) = run_simulation(&cfg, &knn_suite());
        match &r.status {
            Status::Excluded { reason } => assert!(reason.starts_with("insufficient-anomalies"), "{reason}"),
            s => panic!("{s:?}"),
        }
        assert!(r.detectors.is_empty() && r.ground_truth.is_none());
    }

    #[test]
    fn repeatable_and_complete() {
        let mut cfg = SimulationConfig::new("toy", toy(), 300, AnomalySetting::Count(10), 2, 9);
        small(&mut cfg);
        let (a, _) = run_simulation(&cfg, &knn_suite());
        let (b, _) = run_simulation(&cfg, &knn_suite());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.status.is_complete());
        assert_eq!(a.detectors.len(), 1);
        assert_eq!(a.n_faulty, 10);
        assert!((298..=302).contains(&a.n_train));
        assert_eq!(a.n_test, 512);
        // test thresholds come from the test healthy scores: FPR within one step
        let d = &a.detectors[0];
        assert!((d.test_fpr - 0.01).abs() <= 1.0 / 256.0 + 1e-12);
    }

    #[test]
    fn seeds_differ_by_coordinate() {
        let base = SimulationConfig::new("toy", toy(), 300, AnomalySetting::Count(10), 0, 9);
        let mut other = base.clone();
        other.simulation_index = 1;
        assert_ne!(base.seed(), other.seed());
        other = base.clone();
        other.n_train_nominal = 301;
        assert_ne!(base.seed(), other.seed());
        other = base.clone();
        other.anomaly = AnomalySetting::Count(11);
        assert_ne!(base.seed(), other.seed());
    }

    #[test]
    fn failing_detector_excludes_everything() {
        let mut cfg = SimulationConfig::new("toy", toy(), 100, AnomalySetting::Count(10), 0, 3);
        small(&mut cfg);
        let suite = vec![
            knn_suite().remove(0),
            DetectorSpec::single(DetectorKind::Knn, HyperParams::new().with("n_neighbors", 500i64)).unwrap(),
        ];
        let (r, _) = run_simulation(&cfg, &suite);
        assert!(!r.status.is_complete());
        assert!(r.detectors.is_empty());
    }

    #[test]
    fn test_and_training_draws_are_disjoint_streams() {
        let dist = synth::build_tvs(&toy()).unwrap();
        let train = draw_training_set(&dist, 50, 5, 11).unwrap();
        let test = draw_test_set(&dist, &TestSetConfig { batches: 1, batch_size: 110, faulty_fraction: 0.5 }, 11).unwrap();
        for r in train.points.rows() {
            assert!(test.points.rows().all(|t| t != r));
        }
    }
}
