//! On-disk layout: `<root>/<scenario>/<size>/<anomaly>/<index>.json`, with
//! wall-clock timings beside each record in `<index>.timing.json`, and the
//! consolidated table in `<root>/consolidated.csv`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::{csv_rows, SimulationRecord, CSV_COLUMNS};
use crate::config::AnomalySetting;
use crate::error::Result;

pub const CONSOLIDATED_CSV: &str = "consolidated.csv";

/// Sweep position of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub scenario: String,
    pub n_train_nominal: usize,
    pub anomaly: AnomalySetting,
    pub simulation_index: usize,
}

impl Coordinate {
    pub fn relative_dir(&self) -> PathBuf {
        PathBuf::from(&self.scenario).join(self.n_train_nominal.to_string()).join(self.anomaly.label())
    }

    pub fn record_path(&self, root: &Path) -> PathBuf {
        root.join(self.relative_dir()).join(format!("{}.json", self.simulation_index))
    }

    pub fn timing_path(&self, root: &Path) -> PathBuf {
        root.join(self.relative_dir()).join(format!("{}.timing.json", self.simulation_index))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    /// Tuning plus refit plus test scoring, per detector.
    pub detector_seconds: Vec<(String, f64)>,
}

/// Writes via a temporary file in the target directory and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_record(root: &Path, coord: &Coordinate, record: &SimulationRecord, timing: Option<&Timing>) -> Result<()> {
    let mut json = serde_json::to_string_pretty(record)?;
    json.push('\n');
    write_atomic(&coord.record_path(root), json.as_bytes())?;
    if let Some(t) = timing {
        let mut json = serde_json::to_string_pretty(t)?;
        json.push('\n');
        write_atomic(&coord.timing_path(root), json.as_bytes())?;
    }
    Ok(())
}

pub fn read_record(path: &Path) -> Result<SimulationRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Record files are named `<simulation index>.json`.
fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            let stem = name.strip_suffix(".json").unwrap_or("");
            if !stem.is_empty() && stem.bytes().all(|b| b.is_ascii_digit()) {
                out.push(path);
            }
        }
    }
    Ok(())
}

fn sort_key(r: &SimulationRecord) -> (String, usize, &'static str, u64, usize) {
    let v = match r.anomaly {
        AnomalySetting::Rate(x) => x.to_bits(),
        AnomalySetting::Count(c) => c as u64,
    };
    (r.scenario.clone(), r.n_train_nominal, r.anomaly.mode(), v, r.simulation_index)
}

/// Every record under `root`, ordered by sweep coordinates.
pub fn load_records(root: &Path) -> Result<Vec<SimulationRecord>> {
    let mut files = Vec::new();
    if root.is_dir() {
        collect_files(root, &mut files)?;
    }
    let mut records = files.iter().map(|p| read_record(p)).collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    Ok(records)
}

pub fn consolidated_csv(records: &[SimulationRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        for row in csv_rows(r) {
            w.write_record(&row)?;
        }
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// Rebuilds `<root>/consolidated.csv` from the records on disk.
pub fn write_consolidated(root: &Path) -> Result<PathBuf> {
    let records = load_records(root)?;
    let path = root.join(CONSOLIDATED_CSV);
    write_atomic(&path, &consolidated_csv(&records)?)?;
    Ok(path)
}
