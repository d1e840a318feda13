use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tvsbench::analysis::Report;
use tvsbench::config::ExperimentConfig;
use tvsbench::oracle::estimate_gt_metrics;
use tvsbench::pipeline::{self, store};
use tvsbench::synth::{build_tvs, ScenarioSpec};
use tvsbench::Error;

const OUTPUT_ENV: &str = "TVSBENCH_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "tvsbench", version, about = "Anomaly detector benchmark on synthetic TvS distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo estimate of the ground-truth FPR, FNR and AUCROC.
    GtEstimate {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 10_240)]
        batches: usize,
        #[arg(long, default_value_t = 1024)]
        batch_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        target_fpr: f64,
    },
    /// Run every simulation of an experiment config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Skip simulations that already have a record.
        #[arg(long)]
        resume: bool,
        /// Overrides the config's output_dir.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the config's parallelism.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Build reports from a results directory.
    Aggregate {
        #[arg(long, env = OUTPUT_ENV, default_value = "results")]
        results: PathBuf,
        /// ranks, cd, category-max, bounds, selection or all; repeatable.
        #[arg(long, default_value = "all")]
        report: Vec<String>,
        /// Defaults to <results>/reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidScenario(_) | Error::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::from_json(&text, &path.display().to_string())?)
}

fn gt_estimate(scenario: &str, batches: usize, batch_size: usize, seed: u64, target_fpr: f64) -> Result<(), Failure> {
    let spec = ScenarioSpec::preset(scenario).ok_or_else(|| Failure::Usage(format!("unknown scenario preset {scenario:?}")))?;
    let dist = build_tvs(&spec)?;
    let m = estimate_gt_metrics(&dist, target_fpr, batches, batch_size, seed)?;
    println!("scenario,target_fpr,fpr,fnr,aucroc,n_points,seed");
    println!("{},{},{},{},{},{},{}", scenario.to_ascii_uppercase(), m.target_fpr, m.fpr, m.fnr, m.aucroc, m.n_points, seed);
    Ok(())
}

fn simulate(config: &Path, resume: bool, output: Option<PathBuf>, parallelism: Option<usize>) -> Result<(), Failure> {
    let mut exp = load_config(config)?;
    if let Some(p) = parallelism {
        exp.parallelism = p;
        exp.validate()?;
    }
    let root = output
        .or_else(|| exp.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    let summary = pipeline::run_experiment(&exp, &root, resume, &|coord, record| {
        let state = if record.status.is_complete() { "complete" } else { "excluded" };
        eprintln!("{} {}", coord.relative_dir().join(coord.simulation_index.to_string()).display(), state);
    })
    .map_err(|e| Failure::Runtime(e.to_string()))?;
    eprintln!(
        "{} complete, {} excluded, {} skipped; records in {}",
        summary.complete,
        summary.excluded,
        summary.skipped,
        root.display()
    );
    Ok(())
}

fn aggregate(results: &Path, report: &[String], out: Option<PathBuf>) -> Result<(), Failure> {
    let mut reports = Vec::new();
    for r in report.iter().flat_map(|s| s.split(',')) {
        if r == "all" {
            reports.extend(Report::ALL);
        } else {
            reports.push(r.parse::<Report>()?);
        }
    }
    reports.dedup();
    if !results.is_dir() {
        return Err(Failure::Usage(format!("results directory {} does not exist", results.display())));
    }
    let records = store::load_records(results).map_err(|e| Failure::Runtime(e.to_string()))?;
    let out = out.unwrap_or_else(|| results.join("reports"));
    let paths = tvsbench::analysis::write_reports(&records, &out, &reports).map_err(|e| Failure::Runtime(e.to_string()))?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::GtEstimate { scenario, batches, batch_size, seed, target_fpr } => {
            gt_estimate(&scenario, batches, batch_size, seed, target_fpr)
        }
        Command::Simulate { config, resume, output, parallelism } => simulate(&config, resume, output, parallelism),
        Command::Aggregate { results, report, out } => aggregate(&results, &report, out),
        Command::Validate { config } => {
            let exp = load_config(&config)?;
            let n = pipeline::expand(&exp)?.len();
            println!("{}: ok ({n} simulations)", config.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
