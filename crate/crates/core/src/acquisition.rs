//! Dimensionally-homogeneous acquisition functions over Gaussian predictive
//! summaries.
//!
//! All scores are built from dimensionless quantities (coefficients of
//! variation, Z-scores, probabilities), so candidate rankings do not depend
//! on the unit system of the output axes. The p-norm distance is provided
//! only to demonstrate the instability that motivates that restriction; it
//! is not selectable as a strategy.
//!
//! Scoring works in canonical (maximize-everything) orientation throughout.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{column_scale, Matrix};
use crate::pareto::pareto_frontier;
use crate::seeding::derive2;
use crate::surrogate::PredictiveSummary;

/// Standard normal CDF.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Acquisition strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcquisitionKind {
    /// Uniform choice among remaining candidates.
    Random,
    /// Sum of per-output coefficients of variation (uncertainty sampling).
    Scv,
    /// Probability of jointly exceeding the per-axis training maxima.
    Pje,
    /// Z-score of improvement over a hyperplane fit of the training frontier.
    Hpi,
    /// Probability of being non-dominated by the training outputs.
    Pnd,
}

impl fmt::Display for AcquisitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AcquisitionKind::Random => "random",
            AcquisitionKind::Scv => "scv",
            AcquisitionKind::Pje => "pje",
            AcquisitionKind::Hpi => "hpi",
            AcquisitionKind::Pnd => "pnd",
        };
        f.write_str(s)
    }
}

impl FromStr for AcquisitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(AcquisitionKind::Random),
            "scv" => Ok(AcquisitionKind::Scv),
            "pje" => Ok(AcquisitionKind::Pje),
            "hpi" => Ok(AcquisitionKind::Hpi),
            "pnd" => Ok(AcquisitionKind::Pnd),
            other => Err(Error::invalid(format!("unknown acquisition `{other}`"))),
        }
    }
}

/// Tie handling for the argmax. Ties always break toward the lowest pool
/// index so reruns are reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    #[default]
    LowestIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub kind: AcquisitionKind,
    /// Monte Carlo draws per candidate (PND only).
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Relative floor on |mean| in coefficients of variation (SCV only).
    #[serde(default = "default_mu_floor")]
    pub scv_mu_floor_rel: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tie_break: TieBreak,
}

fn default_mc_samples() -> usize {
    1000
}

fn default_mu_floor() -> f64 {
    1e-6
}

impl AcquisitionConfig {
    pub fn new(kind: AcquisitionKind) -> Self {
        AcquisitionConfig {
            kind,
            mc_samples: default_mc_samples(),
            scv_mu_floor_rel: default_mu_floor(),
            seed: 0,
            tie_break: TieBreak::LowestIndex,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == AcquisitionKind::Pnd && self.mc_samples < 100 {
            return Err(Error::invalid("mc_samples must be at least 100 for pnd"));
        }
        if !(self.scv_mu_floor_rel > 0.0) {
            return Err(Error::invalid("scv_mu_floor_rel must be positive"));
        }
        Ok(())
    }
}

/// Snapshot of the training outputs an acquisition decision is made
/// against: the outputs themselves, their Pareto frontier, per-axis maxima,
/// and per-axis magnitude scales.
#[derive(Debug, Clone)]
pub struct FrontierContext {
    train_outputs: Matrix,
    frontier_indices: Vec<usize>,
    frontier_rows: Matrix,
    axis_max: Vec<f64>,
    axis_scale: Vec<f64>,
}

impl FrontierContext {
    pub fn new(train_outputs: Matrix) -> Self {
        let frontier_indices = pareto_frontier(&train_outputs);
        let frontier_rows = train_outputs.select_rows(&frontier_indices);
        let axis_max = (0..train_outputs.cols())
            .map(|d| {
                train_outputs
                    .column(d)
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let axis_scale = (0..train_outputs.cols())
            .map(|d| column_scale(&train_outputs.column(d)))
            .collect();
        FrontierContext {
            train_outputs,
            frontier_indices,
            frontier_rows,
            axis_max,
            axis_scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.train_outputs.cols()
    }

    pub fn train_outputs(&self) -> &Matrix {
        &self.train_outputs
    }

    pub fn frontier_indices(&self) -> &[usize] {
        &self.frontier_indices
    }

    pub fn frontier_rows(&self) -> &Matrix {
        &self.frontier_rows
    }

    pub fn axis_max(&self) -> &[f64] {
        &self.axis_max
    }
}

/// Sum of per-output coefficients of variation, `sigma / max(|mu|, floor)`.
/// The floor is a small fraction of the training column scale, which guards
/// the zero-mean pathology without affecting ordinary candidates.
pub fn score_scv(
    summary: &PredictiveSummary,
    ctx: &FrontierContext,
    cfg: &AcquisitionConfig,
) -> f64 {
    summary
        .mean
        .iter()
        .zip(&summary.sd)
        .zip(&ctx.axis_scale)
        .map(|((&mu, &sd), &scale)| sd / mu.abs().max(cfg.scv_mu_floor_rel * scale))
        .sum()
}

/// Probability that every output jointly exceeds the per-axis maximum seen
/// in the training outputs, under the diagonal Gaussian summary.
pub fn score_pje(summary: &PredictiveSummary, ctx: &FrontierContext) -> f64 {
    summary
        .mean
        .iter()
        .zip(&summary.sd)
        .zip(&ctx.axis_max)
        .map(|((&mu, &sd), &m)| 1.0 - std_normal_cdf((m - mu) / sd))
        .product()
}

/// Hyperplane model of the training frontier: unit normal pointing toward
/// improvement and offset through the frontier mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub b: f64,
}

/// Fit the frontier hyperplane as the least-variance principal direction of
/// the frontier points.
///
/// The sign is fixed so the component sum is positive (improvement points
/// toward jointly larger canonical outputs). When the frontier has fewer
/// points than axes, or no spread at all, the direction falls back to the
/// normalized per-axis reciprocal ranges of the training outputs, which
/// keeps the score defined from the first iteration.
pub fn fit_hyperplane(ctx: &FrontierContext) -> Hyperplane {
    let d = ctx.dim();
    let f = ctx.frontier_rows();
    let m = f.rows();
    let mean: Vec<f64> = (0..d).map(|c| crate::matrix::mean(&f.column(c))).collect();

    let mut w = if m < d {
        reciprocal_range_direction(ctx)
    } else {
        let mut cov = nalgebra::DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for r in 0..m {
                    s += (f.get(r, i) - mean[i]) * (f.get(r, j) - mean[j]);
                }
                let v = s / (m - 1) as f64;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        if cov.trace() <= 0.0 {
            reciprocal_range_direction(ctx)
        } else {
            let eigen = cov.symmetric_eigen();
            let mut least = 0;
            for k in 1..d {
                if eigen.eigenvalues[k] < eigen.eigenvalues[least] {
                    least = k;
                }
            }
            eigen.eigenvectors.column(least).iter().copied().collect()
        }
    };

    orient(&mut w);
    let b = w.iter().zip(&mean).map(|(wi, mi)| wi * mi).sum();
    Hyperplane { w, b }
}

fn reciprocal_range_direction(ctx: &FrontierContext) -> Vec<f64> {
    let d = ctx.dim();
    let mut w: Vec<f64> = (0..d)
        .map(|c| {
            let col = ctx.train_outputs.column(c);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let range = hi - lo;
            if range > 0.0 {
                1.0 / range
            } else {
                1.0
            }
        })
        .collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut w {
        *v /= norm;
    }
    w
}

fn orient(w: &mut [f64]) {
    let sum: f64 = w.iter().sum();
    let flip = if sum != 0.0 {
        sum < 0.0
    } else {
        // Component sum exactly zero: fix the sign by the first nonzero entry.
        w.iter().find(|v| **v != 0.0).map_or(false, |v| *v < 0.0)
    };
    if flip {
        for v in w.iter_mut() {
            *v = -*v;
        }
    }
}

/// Z-score of the candidate's projection beyond the hyperplane. Ranking by
/// this value is equivalent to ranking by the improvement probability, since
/// the normal CDF is strictly increasing.
pub fn score_hpi(summary: &PredictiveSummary, plane: &Hyperplane) -> f64 {
    let proj: f64 = plane
        .w
        .iter()
        .zip(&summary.mean)
        .map(|(w, mu)| w * mu)
        .sum();
    let var: f64 = plane
        .w
        .iter()
        .zip(&summary.sd)
        .map(|(w, sd)| w * w * sd * sd)
        .sum();
    (proj - plane.b) / var.sqrt()
}

/// Weak dominance of `sample` by any frontier row.
///
/// A training point below the frontier pins a strictly smaller lower
/// orthant than the frontier point covering it, so checking the frontier is
/// exact for the union over all training outputs.
#[inline]
fn weakly_dominated(sample: &[f64], frontier: &Matrix) -> bool {
    'rows: for row in frontier.iter_rows() {
        for (s, y) in sample.iter().zip(row) {
            if s > y {
                continue 'rows;
            }
        }
        return true;
    }
    false
}

/// Monte Carlo estimate of the probability that the candidate is
/// non-dominated by the training outputs.
///
/// The dominance check uses weak (componentwise `<=`) dominance; the strict
/// clause has probability zero under the continuous predictive
/// distribution. Deterministic given `stream_seed`, which callers derive
/// from the acquisition seed, the iteration, and the candidate index.
pub fn score_pnd_mc(
    summary: &PredictiveSummary,
    ctx: &FrontierContext,
    mc_samples: usize,
    stream_seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    let d = ctx.dim();
    let mut sample = vec![0.0; d];
    let mut non_dominated = 0usize;
    for _ in 0..mc_samples {
        for (slot, (mu, sd)) in sample.iter_mut().zip(summary.mean.iter().zip(&summary.sd)) {
            let z: f64 = rng.sample(StandardNormal);
            *slot = mu + sd * z;
        }
        if !weakly_dominated(&sample, &ctx.frontier_rows) {
            non_dominated += 1;
        }
    }
    non_dominated as f64 / mc_samples as f64
}

/// Exact probability of non-dominance by inclusion-exclusion over the union
/// of lower orthants of the training outputs. Intended as a reference for
/// the Monte Carlo estimate; cost grows as 2^n, so the training set is
/// capped at 20 points.
pub fn score_pnd_exact(summary: &PredictiveSummary, ctx: &FrontierContext) -> Result<f64> {
    let n = ctx.train_outputs.rows();
    if n > 20 {
        return Err(Error::Capacity(format!(
            "exact non-dominance supports at most 20 training points, got {n}"
        )));
    }
    let d = ctx.dim();
    let mut p_dominated = 0.0;
    let mut corner = vec![0.0; d];
    for mask in 1u32..(1 << n) {
        corner.iter_mut().for_each(|v| *v = f64::INFINITY);
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for (c, y) in corner.iter_mut().zip(ctx.train_outputs.row(i)) {
                *c = c.min(*y);
            }
        }
        let orthant: f64 = corner
            .iter()
            .zip(summary.mean.iter().zip(&summary.sd))
            .map(|(c, (mu, sd))| std_normal_cdf((c - mu) / sd))
            .product();
        if mask.count_ones() % 2 == 1 {
            p_dominated += orthant;
        } else {
            p_dominated -= orthant;
        }
    }
    Ok((1.0 - p_dominated).clamp(0.0, 1.0))
}

/// Minimum p-norm distance from `y` to the frontier points.
///
/// This mixes output axes with different physical units, so the induced
/// ranking depends on the unit system; it exists to demonstrate that
/// instability and is never used to drive acquisition.
pub fn score_pnorm_distance(y: &[f64], frontier: &Matrix, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::invalid("p must be a positive finite number"));
    }
    if y.len() != frontier.cols() {
        return Err(Error::DimensionMismatch {
            expected: frontier.cols(),
            got: y.len(),
        });
    }
    let mut best = f64::INFINITY;
    for row in frontier.iter_rows() {
        let sum: f64 = y
            .iter()
            .zip(row)
            .map(|(a, b)| (a - b).abs().powf(p))
            .sum();
        best = best.min(sum.powf(1.0 / p));
    }
    Ok(best)
}

/// Argmax selection over the remaining candidates.
///
/// `scores` is aligned with `remaining`; ties break toward the lowest pool
/// index. The random strategy ignores scores and draws uniformly using
/// `stream_seed`.
pub fn select_candidate(
    scores: &[f64],
    remaining: &[usize],
    cfg: &AcquisitionConfig,
    stream_seed: u64,
) -> Result<usize> {
    if remaining.is_empty() {
        return Err(Error::ExhaustedPool);
    }
    if scores.len() != remaining.len() {
        return Err(Error::invalid(format!(
            "{} scores for {} candidates",
            scores.len(),
            remaining.len()
        )));
    }
    if cfg.kind == AcquisitionKind::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
        return Ok(remaining[rng.gen_range(0..remaining.len())]);
    }
    let TieBreak::LowestIndex = cfg.tie_break;
    let mut best = 0usize;
    for i in 1..remaining.len() {
        let better = match scores[i].partial_cmp(&scores[best]) {
            Some(std::cmp::Ordering::Greater) => true,
            Some(std::cmp::Ordering::Equal) => remaining[i] < remaining[best],
            _ => false,
        };
        if better {
            best = i;
        }
    }
    Ok(remaining[best])
}

/// Score every remaining candidate under the configured strategy.
///
/// `summaries` covers the whole pool; `remaining` selects the candidates to
/// score. PND candidates are scored in parallel; each candidate's Monte
/// Carlo stream is seeded from (seed, iteration, pool index), so the result
/// is independent of scheduling.
pub fn score_candidates(
    cfg: &AcquisitionConfig,
    ctx: &FrontierContext,
    summaries: &[PredictiveSummary],
    remaining: &[usize],
    iteration: usize,
) -> Vec<f64> {
    match cfg.kind {
        AcquisitionKind::Random => vec![0.0; remaining.len()],
        AcquisitionKind::Scv => remaining
            .iter()
            .map(|&i| score_scv(&summaries[i], ctx, cfg))
            .collect(),
        AcquisitionKind::Pje => remaining
            .iter()
            .map(|&i| score_pje(&summaries[i], ctx))
            .collect(),
        AcquisitionKind::Hpi => {
            let plane = fit_hyperplane(ctx);
            remaining
                .iter()
                .map(|&i| score_hpi(&summaries[i], &plane))
                .collect()
        }
        AcquisitionKind::Pnd => remaining
            .par_iter()
            .map(|&i| {
                let stream = derive2(cfg.seed, iteration as u64, i as u64);
                score_pnd_mc(&summaries[i], ctx, cfg.mc_samples, stream)
            })
            .collect(),
    }
}
