//! Retrospective active-learning engine and ensemble aggregation.
//!
//! One run draws a random initial labeled subset, then repeatedly fits the
//! surrogate, scores the unlabeled candidates with the configured
//! acquisition function, reveals the argmax candidate's label, and records
//! metrics. The snapshot at iteration `k` always reflects the model trained
//! on the labeled set of size `C + k`, before the k-th acquisition is made.
//!
//! Runs are independent units of work; an ensemble executes `R` of them
//! from seeds derived off a master seed and aggregates per-iteration means
//! and standard errors. For a fixed master seed, run `r` of every strategy
//! starts from the identical initial subset, which is what makes paired
//! strategy comparisons valid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{score_candidates, select_candidate, AcquisitionConfig, FrontierContext};
use crate::datasets::LabeledPool;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::{mean_stratum, nndp, MetricSnapshot};
use crate::seeding::{derive, derive2};
use crate::surrogate::{self, SurrogateConfig};

// Child-stream tags hung off the run seed.
const STREAM_INITIAL: u64 = 0;
const STREAM_SURROGATE: u64 = 1;
const STREAM_ACQUISITION: u64 = 2;
// Selection stream per iteration; must never collide with the per-candidate
// Monte Carlo streams keyed by (iteration, candidate index).
const STREAM_SELECT: u64 = u64::MAX;

/// Everything a single run needs besides the pool and its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub acquisition: AcquisitionConfig,
    pub surrogate: SurrogateConfig,
    /// Size C of the random initial labeled subset.
    pub initial_count: usize,
    /// Number K of acquisition iterations.
    pub iterations: usize,
    /// Depth of the ground-truth shell used for shell-scope error.
    pub shell_depth: usize,
}

impl RunSpec {
    pub fn validate(&self, pool: &LabeledPool) -> Result<()> {
        self.acquisition.validate()?;
        self.surrogate.validate()?;
        let n = pool.len();
        if self.initial_count < 2 || self.initial_count >= n {
            return Err(Error::invalid(format!(
                "initial labeled count must satisfy 2 <= C < n (C={}, n={n})",
                self.initial_count
            )));
        }
        if self.iterations < 1 || self.iterations > n - self.initial_count {
            return Err(Error::invalid(format!(
                "iterations must satisfy 1 <= K <= n - C (K={}, n={n}, C={})",
                self.iterations, self.initial_count
            )));
        }
        if self.shell_depth < 1 {
            return Err(Error::invalid("shell_depth must be at least 1"));
        }
        Ok(())
    }
}

/// Record of one active-learning run: the initial subset, the acquisition
/// order, and a metric snapshot per iteration 0..=K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrajectory {
    pub run_seed: u64,
    pub initial: Vec<usize>,
    pub acquired: Vec<usize>,
    pub snapshots: Vec<MetricSnapshot>,
}

fn annotate(e: Error, run_seed: u64, iteration: usize) -> Error {
    Error::Run {
        run_seed,
        iteration,
        source: Box::new(e),
    }
}

/// Per-axis NDE over a row subset, with degenerate scopes mapped to `None`.
fn scoped_ndes(
    pool: &LabeledPool,
    predictions: &Matrix,
    rows: &[usize],
) -> Result<Vec<Option<f64>>> {
    let d = pool.output_dim();
    if rows.len() < 2 {
        return Ok(vec![None; d]);
    }
    let y_true = pool.outputs_canonical().select_rows(rows);
    let y_pred = predictions.select_rows(rows);
    let mut out = Vec::with_capacity(d);
    for axis in 0..d {
        match crate::metrics::nde(&y_true.column(axis), &y_pred.column(axis)) {
            Ok(v) => out.push(Some(v)),
            Err(Error::DegenerateScope { .. }) => out.push(None),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn mean_of_all(values: &[Option<f64>]) -> Option<f64> {
    let mut total = 0.0;
    for v in values {
        total += (*v)?;
    }
    Some(total / values.len() as f64)
}

fn take_snapshot(
    iteration: usize,
    pool: &LabeledPool,
    labeled: &[usize],
    predictions: &Matrix,
    shell_depth: usize,
) -> Result<MetricSnapshot> {
    let truth = pool.truth();
    let all_rows: Vec<usize> = (0..pool.len()).collect();
    let shell_rows = truth.shell(shell_depth)?;
    let nde_global = scoped_ndes(pool, predictions, &all_rows)?;
    let nde_shell = scoped_ndes(pool, predictions, &shell_rows)?;
    Ok(MetricSnapshot {
        iteration,
        nndp: nndp(labeled, truth),
        mean_stratum: mean_stratum(labeled, truth)?,
        mnde_global: mean_of_all(&nde_global),
        mnde_shell: mean_of_all(&nde_shell),
        nde_global,
        nde_shell,
    })
}

/// Execute one retrospective run. Fully deterministic given
/// `(pool, spec, run_seed)`.
pub fn run_once(pool: &LabeledPool, spec: &RunSpec, run_seed: u64) -> Result<RunTrajectory> {
    spec.validate(pool)?;
    let n = pool.len();
    let k_total = spec.iterations;

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive(run_seed, STREAM_INITIAL));
    let mut initial = rand::seq::index::sample(&mut init_rng, n, spec.initial_count).into_vec();
    initial.sort_unstable();

    let mut surrogate_cfg = spec.surrogate.clone();
    surrogate_cfg.seed = derive(run_seed, STREAM_SURROGATE);
    let mut acquisition_cfg = spec.acquisition.clone();
    acquisition_cfg.seed = derive(run_seed, STREAM_ACQUISITION);

    let mut labeled = initial.clone();
    let mut is_labeled = vec![false; n];
    for &i in &labeled {
        is_labeled[i] = true;
    }

    let mut snapshots = Vec::with_capacity(k_total + 1);
    let mut acquired = Vec::with_capacity(k_total);
    for k in 0..=k_total {
        let x_train = pool.features().select_rows(&labeled);
        let y_train = pool.outputs_canonical().select_rows(&labeled);
        let model =
            surrogate::fit(&x_train, &y_train, &surrogate_cfg).map_err(|e| annotate(e, run_seed, k))?;
        let summaries = model
            .predict(pool.features())
            .map_err(|e| annotate(e, run_seed, k))?;
        let mut predictions = Matrix::zeros(n, pool.output_dim());
        for (i, s) in summaries.iter().enumerate() {
            for (d, v) in s.mean.iter().enumerate() {
                predictions.set(i, d, *v);
            }
        }
        snapshots.push(
            take_snapshot(k, pool, &labeled, &predictions, spec.shell_depth)
                .map_err(|e| annotate(e, run_seed, k))?,
        );

        if k < k_total {
            let remaining: Vec<usize> = (0..n).filter(|&i| !is_labeled[i]).collect();
            let ctx = FrontierContext::new(y_train);
            let scores = score_candidates(&acquisition_cfg, &ctx, &summaries, &remaining, k);
            let pick = select_candidate(
                &scores,
                &remaining,
                &acquisition_cfg,
                derive2(acquisition_cfg.seed, STREAM_SELECT, k as u64),
            )
            .map_err(|e| annotate(e, run_seed, k))?;
            is_labeled[pick] = true;
            let pos = labeled.partition_point(|&i| i < pick);
            labeled.insert(pos, pick);
            acquired.push(pick);
        }
    }

    Ok(RunTrajectory {
        run_seed,
        initial,
        acquired,
        snapshots,
    })
}

/// Per-iteration mean and standard error for one metric. Iterations where a
/// value was missing in some runs use the remaining runs (`count` says how
/// many); an iteration missing everywhere aggregates to `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub mean: Vec<Option<f64>>,
    pub stderr: Vec<Option<f64>>,
    pub count: Vec<usize>,
}

/// Aggregated outcome of R runs of one strategy on one pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub pool_name: String,
    pub pool_len: usize,
    pub output_dim: usize,
    pub initial_count: usize,
    pub iterations: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub metric_names: Vec<String>,
    pub series: Vec<MetricSeries>,
    /// How many times each pool index was acquired, across all runs.
    pub selection_counts: Vec<usize>,
    pub trajectories: Vec<RunTrajectory>,
}

impl EnsembleResult {
    /// Aggregate finished trajectories. `trajectories` must all have the
    /// same shape; order defines the run pairing.
    pub fn from_trajectories(
        pool_name: &str,
        pool_len: usize,
        output_dim: usize,
        initial_count: usize,
        iterations: usize,
        master_seed: u64,
        trajectories: Vec<RunTrajectory>,
    ) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::invalid("ensemble needs at least one run"));
        }
        for t in &trajectories {
            if t.snapshots.len() != iterations + 1 || t.acquired.len() != iterations {
                return Err(Error::invalid(format!(
                    "trajectory for run seed {} has {} snapshots and {} acquisitions, expected {} and {}",
                    t.run_seed,
                    t.snapshots.len(),
                    t.acquired.len(),
                    iterations + 1,
                    iterations
                )));
            }
        }
        let metric_names = MetricSnapshot::metric_names(output_dim);
        let n_metrics = metric_names.len();
        let mut series = vec![
            MetricSeries {
                mean: vec![None; iterations + 1],
                stderr: vec![None; iterations + 1],
                count: vec![0; iterations + 1],
            };
            n_metrics
        ];
        for k in 0..=iterations {
            let per_run: Vec<Vec<Option<f64>>> = trajectories
                .iter()
                .map(|t| t.snapshots[k].metric_values())
                .collect();
            for (m, s) in series.iter_mut().enumerate() {
                let values: Vec<f64> = per_run.iter().filter_map(|v| v[m]).collect();
                s.count[k] = values.len();
                if !values.is_empty() {
                    s.mean[k] = Some(crate::matrix::mean(&values));
                    s.stderr[k] = Some(if values.len() > 1 {
                        crate::matrix::sample_std(&values) / (values.len() as f64).sqrt()
                    } else {
                        0.0
                    });
                }
            }
        }
        let mut selection_counts = vec![0usize; pool_len];
        for t in &trajectories {
            for &i in &t.acquired {
                selection_counts[i] += 1;
            }
        }
        Ok(EnsembleResult {
            pool_name: pool_name.to_string(),
            pool_len,
            output_dim,
            initial_count,
            iterations,
            runs: trajectories.len(),
            master_seed,
            metric_names,
            series,
            selection_counts,
            trajectories,
        })
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metric_names.iter().position(|n| n == name)
    }

    /// Mean series for one metric by name.
    pub fn mean_series(&self, name: &str) -> Option<&[Option<f64>]> {
        self.metric_index(name).map(|i| self.series[i].mean.as_slice())
    }
}

/// Seeds of the runs in an ensemble: run r (1-based) uses the r-th derived
/// child of the master seed, independent of the strategy.
pub fn ensemble_run_seeds(master_seed: u64, runs: usize) -> Vec<u64> {
    (1..=runs as u64).map(|r| derive(master_seed, r)).collect()
}

/// Execute R independent runs seeded from `master_seed` and aggregate them.
/// Runs execute in parallel; results are identical for any worker count.
pub fn run_ensemble(
    pool: &LabeledPool,
    spec: &RunSpec,
    runs: usize,
    master_seed: u64,
) -> Result<EnsembleResult> {
    if runs < 1 {
        return Err(Error::invalid("ensemble needs at least one run"));
    }
    spec.validate(pool)?;
    let seeds = ensemble_run_seeds(master_seed, runs);
    let trajectories: Vec<RunTrajectory> = seeds
        .par_iter()
        .map(|&s| run_once(pool, spec, s))
        .collect::<Result<_>>()?;
    EnsembleResult::from_trajectories(
        pool.name(),
        pool.len(),
        pool.output_dim(),
        spec.initial_count,
        spec.iterations,
        master_seed,
        trajectories,
    )
}

/// One row of a pairwise strategy comparison: the mean per-run difference
/// `a - b` of a metric at an iteration, and its paired standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub iteration: usize,
    pub strategy_a: String,
    pub strategy_b: String,
    pub mean_diff: Option<f64>,
    pub paired_stderr: Option<f64>,
    pub count: usize,
}

/// Pairwise per-iteration comparisons between strategies that share a pool,
/// run shape, and master seed (so run `r` is paired across strategies).
pub fn compare_strategies(results: &[(String, &EnsembleResult)]) -> Result<Vec<ComparisonRow>> {
    if results.is_empty() {
        return Err(Error::invalid("nothing to compare"));
    }
    let first = results[0].1;
    for (name, r) in results {
        let compatible = r.pool_name == first.pool_name
            && r.pool_len == first.pool_len
            && r.initial_count == first.initial_count
            && r.iterations == first.iterations
            && r.runs == first.runs
            && r.master_seed == first.master_seed;
        if !compatible {
            return Err(Error::invalid(format!(
                "strategy `{name}` was run with a different pool or run shape"
            )));
        }
    }
    let metric_names = &first.metric_names;
    let mut rows = Vec::new();
    for (ai, (name_a, res_a)) in results.iter().enumerate() {
        for (name_b, res_b) in results.iter().skip(ai + 1) {
            for (m, metric) in metric_names.iter().enumerate() {
                for k in 0..=first.iterations {
                    let diffs: Vec<f64> = res_a
                        .trajectories
                        .iter()
                        .zip(&res_b.trajectories)
                        .filter_map(|(ta, tb)| {
                            let va = ta.snapshots[k].metric_values()[m]?;
                            let vb = tb.snapshots[k].metric_values()[m]?;
                            Some(va - vb)
                        })
                        .collect();
                    let (mean_diff, paired_stderr) = if diffs.is_empty() {
                        (None, None)
                    } else {
                        let mean = crate::matrix::mean(&diffs);
                        let se = if diffs.len() > 1 {
                            crate::matrix::sample_std(&diffs) / (diffs.len() as f64).sqrt()
                        } else {
                            0.0
                        };
                        (Some(mean), Some(se))
                    };
                    rows.push(ComparisonRow {
                        metric: metric.clone(),
                        iteration: k,
                        strategy_a: name_a.clone(),
                        strategy_b: name_b.clone(),
                        mean_diff,
                        paired_stderr,
                        count: diffs.len(),
                    });
                }
            }
        }
    }
    Ok(rows)
}
