//! Bagged-tree regression surrogate with per-output predictive mean and
//! standard deviation.
//!
//! Each output axis gets an independent ensemble of regression trees, each
//! tree trained on a bootstrap resample with variance-reduction splits. The
//! predictive mean is the ensemble average and the predictive sd the spread
//! across trees, floored at a small fraction of the training column scale so
//! downstream Z-scores stay finite. Outputs are modeled independently, so
//! the implied covariance is diagonal.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{column_scale, mean, sample_std, Matrix};
use crate::seeding::derive2;

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateConfig {
    pub n_trees: usize,
    pub min_leaf: usize,
    /// Fraction of features tried per split (at least one is always tried).
    pub feature_fraction: f64,
    /// Relative floor on the predictive sd, in units of the training column
    /// scale.
    pub sd_floor_rel: f64,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            n_trees: 64,
            min_leaf: 1,
            feature_fraction: 1.0 / 3.0,
            sd_floor_rel: 1e-6,
            seed: 0,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 2 {
            return Err(Error::invalid("n_trees must be at least 2"));
        }
        if self.min_leaf < 1 {
            return Err(Error::invalid("min_leaf must be at least 1"));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(Error::invalid("feature_fraction must be in (0, 1]"));
        }
        if !(self.sd_floor_rel > 0.0) {
            return Err(Error::invalid("sd_floor_rel must be positive"));
        }
        Ok(())
    }
}

/// Per-candidate Gaussian predictive summary in canonical orientation.
/// Every sd entry is strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSummary {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// Axis-aligned regression tree; splits maximize variance reduction and sit
/// at midpoints between adjacent distinct feature values.
#[derive(Debug, Clone)]
struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    fn fit(
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
        min_leaf: usize,
        n_try: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut tree = RegressionTree { nodes: Vec::new() };
        let mut rows = rows.to_vec();
        tree.build(x, y, &mut rows, min_leaf, n_try, rng);
        tree
    }

    fn build(
        &mut self,
        x: &Matrix,
        y: &[f64],
        rows: &mut Vec<usize>,
        min_leaf: usize,
        n_try: usize,
        rng: &mut ChaCha8Rng,
    ) -> u32 {
        let m = rows.len();
        let (ymin, ymax) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &r| {
            (acc.0.min(y[r]), acc.1.max(y[r]))
        });
        let leaf_value = if ymin == ymax {
            ymin // exact recall for constant targets
        } else {
            let sum: f64 = rows.iter().map(|&r| y[r]).sum();
            sum / m as f64
        };
        if m < 2 * min_leaf || ymin == ymax {
            self.nodes.push(Node::Leaf { value: leaf_value });
            return (self.nodes.len() - 1) as u32;
        }

        let split = self.best_split(x, y, rows, min_leaf, n_try, rng);
        let Some((feature, threshold)) = split else {
            self.nodes.push(Node::Leaf { value: leaf_value });
            return (self.nodes.len() - 1) as u32;
        };

        let node = self.nodes.len();
        self.nodes.push(Node::Leaf { value: leaf_value }); // placeholder
        let (mut left_rows, mut right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| x.get(r, feature) <= threshold);
        let left = self.build(x, y, &mut left_rows, min_leaf, n_try, rng);
        let right = self.build(x, y, &mut right_rows, min_leaf, n_try, rng);
        self.nodes[node] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        node as u32
    }

    fn best_split(
        &self,
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
        min_leaf: usize,
        n_try: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<(usize, f64)> {
        let m = rows.len();
        let total_sum: f64 = rows.iter().map(|&r| y[r]).sum();
        let total_sq: f64 = rows.iter().map(|&r| y[r] * y[r]).sum();
        let total_sse = total_sq - total_sum * total_sum / m as f64;

        let mut features = rand::seq::index::sample(rng, x.cols(), n_try).into_vec();
        features.sort_unstable(); // ties in gain break toward the lowest feature

        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for &f in &features {
            sorted.sort_unstable_by(|&a, &b| {
                x.get(a, f)
                    .partial_cmp(&x.get(b, f))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            for i in 1..m {
                let r = sorted[i - 1];
                left_sum += y[r];
                left_sq += y[r] * y[r];
                let (lo, hi) = (x.get(sorted[i - 1], f), x.get(sorted[i], f));
                if lo == hi || i < min_leaf || m - i < min_leaf {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let right_sq = total_sq - left_sq;
                let sse = (left_sq - left_sum * left_sum / i as f64)
                    + (right_sq - right_sum * right_sum / (m - i) as f64);
                let gain = total_sse - sse;
                if gain > 0.0 && best.map_or(true, |(g, _, _)| gain > g) {
                    // Midpoint of the gap; if rounding lands it on the upper
                    // value, fall back to the lower so the `<=` predicate
                    // reproduces the index partition exactly.
                    let mut t = lo + (hi - lo) / 2.0;
                    if t >= hi {
                        t = lo;
                    }
                    best = Some((gain, f, t));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn predict(&self, row: &[f64]) -> f64 {
        let mut idx = 0u32;
        loop {
            match &self.nodes[idx as usize] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// Fitted multi-output surrogate: one bagged ensemble per output axis.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    feature_dim: usize,
    ensembles: Vec<Vec<RegressionTree>>,
    sd_floors: Vec<f64>,
}

/// Fit independent bagged-tree ensembles to each output column.
///
/// Deterministic for a given `(data, cfg.seed)` regardless of worker count:
/// every tree's RNG is derived from the seed and the tree's position, never
/// from scheduling.
pub fn fit(x: &Matrix, y: &Matrix, cfg: &SurrogateConfig) -> Result<SurrogateModel> {
    cfg.validate()?;
    if x.rows() < 2 {
        return Err(Error::InsufficientData {
            need: 2,
            got: x.rows(),
        });
    }
    if y.rows() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.rows(),
        });
    }
    if !x.all_finite() || !y.all_finite() {
        return Err(Error::invalid("training data contains non-finite values"));
    }

    let n = x.rows();
    let d = y.cols();
    let n_try = ((x.cols() as f64 * cfg.feature_fraction).ceil() as usize).clamp(1, x.cols());
    let columns: Vec<Vec<f64>> = (0..d).map(|c| y.column(c)).collect();
    let sd_floors: Vec<f64> = columns
        .iter()
        .map(|c| cfg.sd_floor_rel * column_scale(c))
        .collect();

    let jobs: Vec<(usize, usize)> = (0..d)
        .flat_map(|di| (0..cfg.n_trees).map(move |t| (di, t)))
        .collect();
    let trees: Vec<RegressionTree> = jobs
        .par_iter()
        .map(|&(di, t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive2(cfg.seed, di as u64, t as u64));
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            RegressionTree::fit(x, &columns[di], &bootstrap, cfg.min_leaf, n_try, &mut rng)
        })
        .collect();

    let mut ensembles: Vec<Vec<RegressionTree>> = vec![Vec::with_capacity(cfg.n_trees); d];
    for ((di, _), tree) in jobs.into_iter().zip(trees) {
        ensembles[di].push(tree);
    }

    Ok(SurrogateModel {
        feature_dim: x.cols(),
        ensembles,
        sd_floors,
    })
}

impl SurrogateModel {
    pub fn output_dim(&self) -> usize {
        self.ensembles.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// One summary per query row: per-output ensemble mean and floored
    /// across-tree standard deviation.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<PredictiveSummary>> {
        if x.cols() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                got: x.cols(),
            });
        }
        let mut out = Vec::with_capacity(x.rows());
        let mut per_tree = vec![0.0; self.ensembles[0].len()];
        for row in x.iter_rows() {
            let mut means = Vec::with_capacity(self.output_dim());
            let mut sds = Vec::with_capacity(self.output_dim());
            for (d, ensemble) in self.ensembles.iter().enumerate() {
                for (slot, tree) in per_tree.iter_mut().zip(ensemble) {
                    *slot = tree.predict(row);
                }
                means.push(mean(&per_tree));
                sds.push(sample_std(&per_tree).max(self.sd_floors[d]));
            }
            out.push(PredictiveSummary {
                mean: means,
                sd: sds,
            });
        }
        Ok(out)
    }

    /// Predicted means as an `n x D` matrix (for error metrics).
    pub fn predict_means(&self, x: &Matrix) -> Result<Matrix> {
        let summaries = self.predict(x)?;
        let d = self.output_dim();
        let mut m = Matrix::zeros(summaries.len(), d);
        for (i, s) in summaries.iter().enumerate() {
            for (j, v) in s.mean.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        Ok(m)
    }
}
