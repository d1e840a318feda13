//! CSV and JSON artifacts for the aggregate reports.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::{category_max, critical_difference, generalization_bounds, rank_detectors, CdResult, GroupKey, Selector};
use crate::error::{Error, Result};
use crate::pipeline::store::write_atomic;
use crate::pipeline::SimulationRecord;

pub const CD_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Report {
    Ranks,
    Cd,
    CategoryMax,
    Bounds,
    Selection,
}

impl Report {
    pub const ALL: [Report; 5] = [Report::Ranks, Report::Cd, Report::CategoryMax, Report::Bounds, Report::Selection];

    pub fn name(self) -> &'static str {
        match self {
            Report::Ranks => "ranks",
            Report::Cd => "cd",
            Report::CategoryMax => "category-max",
            Report::Bounds => "bounds",
            Report::Selection => "selection",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Report::Ranks => "ranks.csv",
            Report::Cd => "cd.json",
            Report::CategoryMax => "category_max.csv",
            Report::Bounds => "bounds.csv",
            Report::Selection => "selection.csv",
        }
    }

    pub fn render(self, records: &[SimulationRecord]) -> Result<Vec<u8>> {
        match self {
            Report::Ranks => ranks_csv(records),
            Report::Cd => cd_json(records),
            Report::CategoryMax => category_csv(records),
            Report::Bounds => bounds_csv(records),
            Report::Selection => selection_csv(records),
        }
    }
}

impl FromStr for Report {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Report::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown report {s:?}")))
    }
}

/// Render each report and write it atomically under `dir`.
pub fn write_reports(records: &[SimulationRecord], dir: &Path, reports: &[Report]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for &r in reports {
        let path = dir.join(r.file_name());
        write_atomic(&path, &r.render(records)?)?;
        paths.push(path);
    }
    Ok(paths)
}

const KEY_COLUMNS: [&str; 4] = ["scenario", "n_train", "anomaly_mode", "anomaly_value"];

fn key_fields(k: &GroupKey) -> Vec<String> {
    vec![k.scenario.clone(), k.n_train_nominal.to_string(), k.anomaly.mode().into(), k.anomaly.value_string()]
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_bytes(columns: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(KEY_COLUMNS.iter().chain(columns))?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn ranks_csv(records: &[SimulationRecord]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for g in rank_detectors(records)? {
        for d in 0..g.detectors.len() {
            let mut row = key_fields(&g.key);
            row.extend([
                g.detectors[d].clone(),
                g.categories[d].clone(),
                g.n_simulations().to_string(),
                num(g.mean_ranks[d]),
                num(g.mean_test_aucroc[d]),
                num(g.test_aucroc_bounds[d].0),
                num(g.test_aucroc_bounds[d].1),
            ]);
            rows.push(row);
        }
    }
    csv_bytes(
        &["detector", "category", "n_simulations", "mean_rank", "mean_test_aucroc", "test_aucroc_p2_5", "test_aucroc_p97_5"],
        rows,
    )
}

#[derive(Serialize)]
struct CdEntry {
    #[serde(flatten)]
    key: GroupKey,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<CdResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
}

/// Groups too small for the test are listed with the reason instead.
pub fn cd_json(records: &[SimulationRecord]) -> Result<Vec<u8>> {
    let entries: Vec<CdEntry> = rank_detectors(records)?
        .into_iter()
        .map(|g| match critical_difference(&g.rank_matrix, &g.detectors, CD_ALPHA) {
            Ok(r) => CdEntry { key: g.key, result: Some(r), skipped: None },
            Err(e) => CdEntry { key: g.key, result: None, skipped: Some(e.to_string()) },
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&entries)?;
    out.push(b'\n');
    Ok(out)
}

pub fn category_csv(records: &[SimulationRecord]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for g in category_max(records)? {
        for s in &g.categories {
            let mut row = key_fields(&g.key);
            row.extend([
                s.category.as_str().to_string(),
                s.n_simulations.to_string(),
                num(s.mean),
                num(s.p10),
                num(s.p90),
                num(s.p_value_vs_best),
            ]);
            rows.push(row);
        }
    }
    csv_bytes(&["category", "n_simulations", "mean_max_test_aucroc", "p10", "p90", "p_value_vs_best"], rows)
}

pub fn bounds_csv(records: &[SimulationRecord]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for sel in [Selector::PerDetector, Selector::BestByValidation] {
        for b in generalization_bounds(records, sel)?.bounds {
            let mut row = key_fields(&b.key);
            row.extend([
                b.detector.clone(),
                b.n_simulations.to_string(),
                num(b.lower),
                num(b.upper),
                num(b.mean_difference),
                num(b.mse_aucroc),
                num(b.mse_fnr),
                num(b.fnr_lower),
                num(b.fnr_upper),
                b.mean_sq_rank.map(num).unwrap_or_default(),
            ]);
            rows.push(row);
        }
    }
    csv_bytes(
        &[
            "detector",
            "n_simulations",
            "aucroc_lower",
            "aucroc_upper",
            "aucroc_mean_difference",
            "mse_aucroc",
            "mse_fnr",
            "fnr_lower",
            "fnr_upper",
            "mean_sq_rank",
        ],
        rows,
    )
}

pub fn selection_csv(records: &[SimulationRecord]) -> Result<Vec<u8>> {
    let rows = generalization_bounds(records, Selector::BestByValidation)?
        .selection
        .into_iter()
        .map(|s| {
            let mut row = key_fields(&s.key);
            row.extend([s.basis, s.detector, s.count.to_string(), s.percent.to_string()]);
            row
        })
        .collect();
    csv_bytes(&["basis", "detector", "count", "percent"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fixtures::record;
    use crate::config::AnomalySetting;
    use crate::detectors::DetectorKind::{Knn, Lof};

    fn records(n: usize) -> Vec<SimulationRecord> {
        (0..n).map(|i| record(i, AnomalySetting::Rate(0.005), &[(Knn, 0.9, 0.9 - 0.001 * i as f64), (Lof, 0.8, 0.85)])).collect()
    }

    #[test]
    fn report_names_round_trip() {
        for r in Report::ALL {
            assert_eq!(r.name().parse::<Report>().unwrap(), r);
        }
        assert!("plots".parse::<Report>().is_err());
    }

    #[test]
    fn ranks_csv_has_one_row_per_detector() {
        let text = String::from_utf8(ranks_csv(&records(3)).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("scenario,n_train,anomaly_mode,anomaly_value,detector"));
        assert!(lines[1].starts_with("S2,1000,rate,0.005,knn,US,3,1,"));
    }

    #[test]
    fn cd_skips_small_groups() {
        let small: serde_json::Value = serde_json::from_slice(&cd_json(&records(3)).unwrap()).unwrap();
        assert!(small[0]["skipped"].is_string());
        let big: serde_json::Value = serde_json::from_slice(&cd_json(&records(12)).unwrap()).unwrap();
        assert_eq!(big[0]["result"]["mean_ranks"][0], 1.0);
        assert_eq!(big[0]["scenario"], "S2");
    }

    #[test]
    fn writes_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let recs = records(12);
        let paths = write_reports(&recs, dir.path(), &Report::ALL).unwrap();
        let first: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        write_reports(&recs, dir.path(), &Report::ALL).unwrap();
        let second: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
        assert_eq!(paths.len(), 5);
    }
}
