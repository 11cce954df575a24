//! Command-line front end and its file formats.
//!
//! Four batch subcommands cover the whole workflow:
//!
//! - `generate` writes a synthetic pool as a features/outputs CSV pair plus
//!   a JSON sidecar;
//! - `run` executes every strategy of an experiment config and writes one
//!   trajectory CSV per (strategy, run) plus a manifest of the resolved
//!   config and seeds;
//! - `aggregate` turns a run directory into per-iteration summary curves, a
//!   selection-density table, and pairwise strategy comparisons;
//! - `report` reshapes aggregates into a tidy long-format curve table keyed
//!   by (case, strategy, scope, metric, iteration).
//!
//! Every number is written in the shortest decimal form that parses back to
//! the identical float, and all orderings are fixed, so rerunning any stage
//! on the same inputs reproduces its outputs byte for byte regardless of
//! `--threads`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::datasets::{self, LabeledPool, PoolSource, SyntheticKind};
use crate::error::{Error, Result};
use crate::metrics::MetricSnapshot;
use crate::simulate::{
    compare_strategies, ensemble_run_seeds, run_ensemble, EnsembleResult, RunTrajectory,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAJECTORY_DIR: &str = "trajectories";
pub const CURVES_FILE: &str = "curves.csv";
pub const DENSITY_FILE: &str = "density.csv";
pub const COMPARISONS_FILE: &str = "comparisons.csv";
pub const REPORT_FILE: &str = "curves_long.csv";

#[derive(Debug, Parser)]
#[command(name = "stratal", version, about = "Multi-objective active learning over finite pools")]
pub struct Cli {
    /// Upper bound on worker threads (results are identical for any value).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic candidate pool and write it to a directory.
    Generate {
        /// One of: linear, circular, hyperbolic, bat.
        #[arg(long)]
        case: String,
        /// Pool size.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Output directory (default: $STRATAL_OUTPUT_DIR or ./stratal-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every strategy of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Aggregate the trajectories of one run directory.
    Aggregate {
        /// Run output directory (contains manifest.json and trajectories/).
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reshape aggregates into tidy long-format plot data.
    Report {
        /// Aggregate directory (contains manifest.json and curves.csv).
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Entry point used by the binary; returns the process exit code
/// (0 success, 1 runtime failure, 2 usage or validation error).
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore the error if a pool already exists (e.g. repeated init in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let outcome = match cli.command {
        Command::Generate { case, n, seed, out } => cmd_generate(&case, n, seed, out),
        Command::Run { config } => cmd_run(&config),
        Command::Aggregate { input, out } => cmd_aggregate(&input, out),
        Command::Report { input, out } => cmd_report(&input, out),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

fn resolve_out(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os("STRATAL_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("stratal-out"))
}

/// `generate`: write a synthetic pool and print its summary.
pub fn cmd_generate(case: &str, n: usize, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let kind: SyntheticKind = case.parse()?;
    let pool = datasets::generate(kind, n, seed)?;
    let dir = resolve_out(out);
    datasets::save_pool(&pool, &dir, &PoolSource::Synthetic { case: kind, seed })?;
    println!(
        "pool `{}`: n={} D={} frontier={} max_stratum={} -> {}",
        pool.name(),
        pool.len(),
        pool.output_dim(),
        pool.truth().frontier().len(),
        pool.truth().stratum_count(),
        dir.display()
    );
    Ok(())
}

/// Pool facts recorded in the run manifest and checked again on aggregate.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoolSummary {
    pub name: String,
    pub n: usize,
    pub feature_dim: usize,
    pub output_dim: usize,
    pub frontier_size: usize,
    pub max_stratum: usize,
    pub axis_names: Vec<String>,
}

impl PoolSummary {
    fn of(pool: &LabeledPool) -> Self {
        PoolSummary {
            name: pool.name().to_string(),
            n: pool.len(),
            feature_dim: pool.feature_dim(),
            output_dim: pool.output_dim(),
            frontier_size: pool.truth().frontier().len(),
            max_stratum: pool.truth().stratum_count(),
            axis_names: pool
                .objective_spec()
                .axes()
                .iter()
                .map(|a| a.name.clone())
                .collect(),
        }
    }
}

/// Resolved configuration and seeds of one `run` invocation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    /// Directory the config file lived in; CSV dataset paths resolve
    /// against it.
    pub config_dir: PathBuf,
    pub pool: PoolSummary,
    pub strategy_names: Vec<String>,
    pub run_seeds: Vec<u64>,
    /// Initial labeled subsets per run; identical across strategies.
    pub initial_sets: Vec<Vec<usize>>,
}

pub fn trajectory_file_name(strategy: &str, run: usize) -> String {
    format!("{strategy}-run{run:03}.csv")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(field: &str, row: usize, column: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse {
            row,
            column: column.to_string(),
            message: format!("`{field}` is not a number"),
        })
}

fn parse_req<T: std::str::FromStr>(field: &str, row: usize, column: &str) -> Result<T> {
    field.parse::<T>().map_err(|_| Error::Parse {
        row,
        column: column.to_string(),
        message: format!("`{field}` is not valid"),
    })
}

/// Write one run's trajectory: iteration, acquired index, then the metric
/// columns in canonical order.
pub fn write_trajectory_csv(path: &Path, traj: &RunTrajectory, output_dim: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["iteration".to_string(), "acquired_index".to_string()];
    header.extend(MetricSnapshot::metric_names(output_dim));
    w.write_record(&header)?;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let mut record = vec![
            k.to_string(),
            if k == 0 {
                String::new()
            } else {
                traj.acquired[k - 1].to_string()
            },
        ];
        for v in snap.metric_values() {
            record.push(fmt_opt(v));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a trajectory file back into snapshots and acquisition order.
pub fn read_trajectory_csv(path: &Path, output_dim: usize) -> Result<(Vec<MetricSnapshot>, Vec<usize>)> {
    let mut expected = vec!["iteration".to_string(), "acquired_index".to_string()];
    expected.extend(MetricSnapshot::metric_names(output_dim));
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    if headers != expected {
        return Err(Error::Schema(format!(
            "{}: unexpected columns {:?}",
            path.display(),
            headers
        )));
    }
    let d = output_dim;
    let mut snapshots = Vec::new();
    let mut acquired = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let get = |c: usize| record.get(c).unwrap_or("");
        let iteration: usize = parse_req(get(0), row, "iteration")?;
        if iteration != i {
            return Err(Error::Schema(format!(
                "{}: iterations out of order at row {row}",
                path.display()
            )));
        }
        if i == 0 {
            if !get(1).is_empty() {
                return Err(Error::Schema(format!(
                    "{}: iteration 0 must not have an acquired index",
                    path.display()
                )));
            }
        } else {
            acquired.push(parse_req(get(1), row, "acquired_index")?);
        }
        let nndp: f64 = parse_opt(get(2), row, "nndp")?
            .ok_or_else(|| Error::Schema(format!("{}: missing nndp at row {row}", path.display())))?;
        let mean_stratum = parse_opt(get(3), row, "mean_stratum")?.ok_or_else(|| {
            Error::Schema(format!("{}: missing mean_stratum at row {row}", path.display()))
        })?;
        let mnde_global = parse_opt(get(4), row, "mnde_global")?;
        let mnde_shell = parse_opt(get(5), row, "mnde_shell")?;
        let mut nde_global = Vec::with_capacity(d);
        let mut nde_shell = Vec::with_capacity(d);
        for a in 0..d {
            nde_global.push(parse_opt(get(6 + a), row, &expected[6 + a])?);
        }
        for a in 0..d {
            nde_shell.push(parse_opt(get(6 + d + a), row, &expected[6 + d + a])?);
        }
        snapshots.push(MetricSnapshot {
            iteration,
            nndp: nndp as usize,
            mean_stratum,
            mnde_global,
            mnde_shell,
            nde_global,
            nde_shell,
        });
    }
    if snapshots.is_empty() {
        return Err(Error::Schema(format!("{}: no rows", path.display())));
    }
    Ok((snapshots, acquired))
}

/// `run`: execute every strategy and write trajectories plus the manifest.
pub fn cmd_run(config_path: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config_path)?;
    let config_dir = config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let (pool, _) = cfg.dataset.build_pool(&config_dir)?;
    cfg.validate_for_pool(&pool)?;

    let out = resolve_out(cfg.run.output_dir.clone());
    let traj_dir = out.join(TRAJECTORY_DIR);
    std::fs::create_dir_all(&traj_dir)?;

    let mut strategy_names = Vec::new();
    let mut initial_sets: Option<Vec<Vec<usize>>> = None;
    for strategy in &cfg.strategies {
        let spec = cfg.run_spec(strategy);
        let ens = run_ensemble(&pool, &spec, cfg.run.runs, cfg.run.master_seed)?;
        let name = strategy.kind.to_string();
        for (i, traj) in ens.trajectories.iter().enumerate() {
            let path = traj_dir.join(trajectory_file_name(&name, i + 1));
            write_trajectory_csv(&path, traj, pool.output_dim())?;
        }
        if initial_sets.is_none() {
            initial_sets = Some(ens.trajectories.iter().map(|t| t.initial.clone()).collect());
        }
        strategy_names.push(name);
    }

    let manifest = RunManifest {
        config: cfg.clone(),
        config_dir,
        pool: PoolSummary::of(&pool),
        strategy_names,
        run_seeds: ensemble_run_seeds(cfg.run.master_seed, cfg.run.runs),
        initial_sets: initial_sets.unwrap_or_default(),
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    println!(
        "ran {} strategies x {} runs on `{}` -> {}",
        manifest.strategy_names.len(),
        cfg.run.runs,
        pool.name(),
        out.display()
    );
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    std::fs::write(path, body)?;
    Ok(())
}

fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Err(Error::Schema(format!(
            "{} not found (not a run or aggregate directory?)",
            path.display()
        )));
    }
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Rebuild per-strategy ensembles from a run directory.
pub fn load_run_results(dir: &Path) -> Result<(RunManifest, LabeledPool, Vec<(String, EnsembleResult)>)> {
    let manifest = read_manifest(dir)?;
    let (pool, _) = manifest.config.dataset.build_pool(&manifest.config_dir)?;
    if PoolSummary::of(&pool) != manifest.pool {
        return Err(Error::invalid(
            "dataset does not match the manifest (mixed or stale run outputs?)",
        ));
    }
    let runs = manifest.config.run.runs;
    let traj_dir = dir.join(TRAJECTORY_DIR);

    let expected: BTreeSet<String> = manifest
        .strategy_names
        .iter()
        .flat_map(|s| (1..=runs).map(move |r| trajectory_file_name(s, r)))
        .collect();
    let mut found = BTreeSet::new();
    for entry in std::fs::read_dir(&traj_dir)? {
        found.insert(entry?.file_name().to_string_lossy().into_owned());
    }
    if let Some(unexpected) = found.difference(&expected).next() {
        return Err(Error::invalid(format!(
            "unexpected trajectory file `{unexpected}` (mixed run outputs?)"
        )));
    }

    let mut results = Vec::new();
    for name in &manifest.strategy_names {
        let mut trajectories = Vec::with_capacity(runs);
        for r in 1..=runs {
            let path = traj_dir.join(trajectory_file_name(name, r));
            let (snapshots, acquired) = read_trajectory_csv(&path, pool.output_dim())?;
            trajectories.push(RunTrajectory {
                run_seed: manifest.run_seeds[r - 1],
                initial: manifest.initial_sets[r - 1].clone(),
                acquired,
                snapshots,
            });
        }
        let ens = EnsembleResult::from_trajectories(
            pool.name(),
            pool.len(),
            pool.output_dim(),
            manifest.config.run.initial,
            manifest.config.run.iterations,
            manifest.config.run.master_seed,
            trajectories,
        )?;
        results.push((name.clone(), ens));
    }
    Ok((manifest, pool, results))
}

/// `aggregate`: summary curves, selection densities, pairwise comparisons.
pub fn cmd_aggregate(input: &Path, out: Option<PathBuf>) -> Result<()> {
    let (manifest, pool, results) = load_run_results(input)?;
    let dir = resolve_out(out);
    std::fs::create_dir_all(&dir)?;

    // curves.csv: per-strategy per-iteration mean and standard error.
    let mut w = csv::Writer::from_path(dir.join(CURVES_FILE))?;
    w.write_record(["strategy", "iteration", "metric", "mean", "stderr", "count"])?;
    for (name, ens) in &results {
        for (m, metric) in ens.metric_names.iter().enumerate() {
            let series = &ens.series[m];
            for k in 0..=ens.iterations {
                w.write_record([
                    name.as_str(),
                    &k.to_string(),
                    metric.as_str(),
                    &fmt_opt(series.mean[k]),
                    &fmt_opt(series.stderr[k]),
                    &series.count[k].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;

    // density.csv: raw output coordinates and per-strategy selection counts.
    let mut w = csv::Writer::from_path(dir.join(DENSITY_FILE))?;
    let mut header = vec!["pool_index".to_string()];
    header.extend(manifest.pool.axis_names.iter().map(|a| format!("y_{a}")));
    header.extend(results.iter().map(|(n, _)| format!("count_{n}")));
    w.write_record(&header)?;
    for i in 0..pool.len() {
        let mut record = vec![i.to_string()];
        record.extend(pool.outputs_raw().row(i).iter().map(|v| v.to_string()));
        record.extend(results.iter().map(|(_, e)| e.selection_counts[i].to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;

    // comparisons.csv: paired per-iteration differences for strategy pairs.
    let refs: Vec<(String, &EnsembleResult)> =
        results.iter().map(|(n, e)| (n.clone(), e)).collect();
    let rows = compare_strategies(&refs)?;
    let mut w = csv::Writer::from_path(dir.join(COMPARISONS_FILE))?;
    w.write_record([
        "metric",
        "iteration",
        "strategy_a",
        "strategy_b",
        "mean_diff",
        "paired_stderr",
        "count",
    ])?;
    for row in rows {
        w.write_record([
            row.metric.as_str(),
            &row.iteration.to_string(),
            row.strategy_a.as_str(),
            row.strategy_b.as_str(),
            &fmt_opt(row.mean_diff),
            &fmt_opt(row.paired_stderr),
            &row.count.to_string(),
        ])?;
    }
    w.flush()?;

    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    println!(
        "aggregated {} strategies x {} runs -> {}",
        results.len(),
        manifest.config.run.runs,
        dir.display()
    );
    Ok(())
}

/// One parsed row of `curves.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub strategy: String,
    pub iteration: usize,
    pub metric: String,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub count: usize,
}

pub fn read_curves_csv(path: &Path) -> Result<Vec<CurveRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    let expected = ["strategy", "iteration", "metric", "mean", "stderr", "count"];
    if headers != expected {
        return Err(Error::Schema(format!(
            "{}: unexpected columns {:?}",
            path.display(),
            headers
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        rows.push(CurveRow {
            strategy: record.get(0).unwrap_or("").to_string(),
            iteration: parse_req(record.get(1).unwrap_or(""), row, "iteration")?,
            metric: record.get(2).unwrap_or("").to_string(),
            mean: parse_opt(record.get(3).unwrap_or(""), row, "mean")?,
            stderr: parse_opt(record.get(4).unwrap_or(""), row, "stderr")?,
            count: parse_req(record.get(5).unwrap_or(""), row, "count")?,
        });
    }
    Ok(rows)
}

/// Split a trajectory metric name into the report's (scope, metric) key.
fn scope_of(metric: &str) -> (String, String) {
    if let Some(base) = metric.strip_suffix("_global") {
        ("global".to_string(), base.to_string())
    } else if let Some(base) = metric.strip_suffix("_shell") {
        ("shell".to_string(), base.to_string())
    } else {
        ("pool".to_string(), metric.to_string())
    }
}

/// `report`: tidy long-format curve table for plotting tools.
pub fn cmd_report(input: &Path, out: Option<PathBuf>) -> Result<()> {
    let manifest = read_manifest(input)?;
    let curves_path = input.join(CURVES_FILE);
    if !curves_path.exists() {
        return Err(Error::Schema(format!("{} not found", curves_path.display())));
    }
    let rows = read_curves_csv(&curves_path)?;

    // Every canonical metric must be present for every strategy.
    let required = MetricSnapshot::metric_names(manifest.pool.output_dim);
    for strategy in &manifest.strategy_names {
        for metric in &required {
            if !rows
                .iter()
                .any(|r| &r.strategy == strategy && &r.metric == metric)
            {
                return Err(Error::Schema(format!(
                    "missing metric column `{metric}` for strategy `{strategy}`"
                )));
            }
        }
    }

    let dir = resolve_out(out);
    std::fs::create_dir_all(&dir)?;
    let mut w = csv::Writer::from_path(dir.join(REPORT_FILE))?;
    w.write_record(["case", "strategy", "scope", "metric", "iteration", "mean", "stderr"])?;
    for row in &rows {
        let (scope, metric) = scope_of(&row.metric);
        w.write_record([
            manifest.pool.name.as_str(),
            row.strategy.as_str(),
            scope.as_str(),
            metric.as_str(),
            &row.iteration.to_string(),
            &fmt_opt(row.mean),
            &fmt_opt(row.stderr),
        ])?;
    }
    w.flush()?;
    println!("report -> {}", dir.join(REPORT_FILE).display());
    Ok(())
}
