use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tvsbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvsbench")).args(args).env_remove("TVSBENCH_OUTPUT_DIR").output().unwrap()
}

fn preset(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).display().to_string()
}

const SMALL: &str = r#"{
  "schema_version": 1,
  "scenarios": [{"name": "S1"}, {"name": "S2"}],
  "sizes": [200, 300],
  "anomalies": [{"count": 10}],
  "repetitions": 3,
  "detectors": [{"name": "knn", "grid": {"n_neighbors": [3, 5]}}, {"name": "lof", "grid": {"n_neighbors": [5, 10]}}],
  "master_seed": 3,
  "test_set": {"batches": 2, "batch_size": 128, "faulty_fraction": 0.5}
}"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_shipped_presets() {
    for name in ["s1.json", "s2.json", "toy.json"] {
        let out = tvsbench(&["validate", "--config", &preset(name)]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"schema_version\": 1,\n  \"bogus\": 2\n}");
    let out = tvsbench(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config.json:3:"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(tvsbench(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tvsbench(&["gt-estimate", "--scenario", "S9"]).status.code(), Some(1));
    assert_eq!(tvsbench(&["aggregate", "--results", "/nonexistent/results"]).status.code(), Some(1));
    assert_eq!(tvsbench(&["--help"]).status.code(), Some(0));
}

#[test]
fn gt_estimate_prints_one_row() {
    let out = tvsbench(&["gt-estimate", "--scenario", "S1", "--batches", "4", "--batch-size", "256", "--seed", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scenario,target_fpr,fpr,fnr,aucroc,n_points,seed");
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!((row[0], row[5], row[6]), ("S1", "1024", "5"));
    let auc: f64 = row[4].parse().unwrap();
    assert!(auc > 0.95 && auc <= 1.0);
}

#[test]
fn simulate_aggregate_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let results = dir.path().join("results");
    let (cfg, res) = (cfg.to_str().unwrap(), results.to_str().unwrap());

    let out = tvsbench(&["simulate", "--config", cfg, "--output", res]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read(results.join("consolidated.csv")).unwrap();
    let record = results.join("S2/300/count-10/2.json");
    let before = std::fs::read(&record).unwrap();

    let out = tvsbench(&["aggregate", "--results", res, "--report", "ranks"]);
    assert!(out.status.success());
    let ranks = std::fs::read_to_string(results.join("reports/ranks.csv")).unwrap();
    let rows: Vec<&str> = ranks.lines().skip(1).collect();
    // one row per detector per (scenario, size)
    assert_eq!(rows.len(), 2 * 2 * 2);
    assert!(rows.iter().all(|r| r.split(',').nth(6) == Some("3")));

    let out = tvsbench(&["simulate", "--config", cfg, "--output", res, "--resume"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 complete, 0 excluded, 12 skipped"));
    assert_eq!(std::fs::read(&record).unwrap(), before);

    // a missing record is recomputed identically
    std::fs::remove_file(&record).unwrap();
    let out = tvsbench(&["simulate", "--config", cfg, "--output", res, "--resume"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 complete, 0 excluded, 11 skipped"));
    assert_eq!(std::fs::read(&record).unwrap(), before);
    assert_eq!(std::fs::read(results.join("consolidated.csv")).unwrap(), csv);

    let out = tvsbench(&["aggregate", "--results", res]);
    assert!(out.status.success());
    let first = std::fs::read(results.join("reports/bounds.csv")).unwrap();
    tvsbench(&["aggregate", "--results", res]);
    assert_eq!(std::fs::read(results.join("reports/bounds.csv")).unwrap(), first);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace("\"repetitions\": 3", "\"repetitions\": 1").replace("\"sizes\": [200, 300]", "\"sizes\": [200]");
    let cfg = write_config(dir.path(), &cfg);
    let env_dir = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_tvsbench"))
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .env("TVSBENCH_OUTPUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.join("consolidated.csv").is_file());
}
