//! Candidate-improvement and model-accuracy metrics.
//!
//! Model error is measured by the non-dimensional error per output (the
//! square root of one minus R-squared) and its mean across outputs, at
//! either global scope (the whole pool) or shell scope (the ground-truth
//! Pareto s-shell). Candidate improvement is measured by the number of
//! acquired frontier points and the mean ground-truth stratum number of the
//! acquired set.

use serde::{Deserialize, Serialize};

use crate::datasets::LabeledPool;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pareto::StrataIndex;

/// Which rows of the pool an error metric is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScopeSpec {
    /// Every pool row.
    Global,
    /// Rows in the ground-truth Pareto shell of the full pool.
    Shell { depth: usize },
}

/// Per-iteration metric record. `None` marks a degenerate scope (too few
/// rows or no variance on an axis), which is excluded from aggregation
/// rather than treated as a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSnapshot {
    pub iteration: usize,
    pub nndp: usize,
    pub mean_stratum: f64,
    pub mnde_global: Option<f64>,
    pub mnde_shell: Option<f64>,
    pub nde_global: Vec<Option<f64>>,
    pub nde_shell: Vec<Option<f64>>,
}

impl MetricSnapshot {
    /// Stable ordering of the metric columns for a pool with `output_dim`
    /// outputs, shared by trajectory files, aggregation, and comparisons.
    pub fn metric_names(output_dim: usize) -> Vec<String> {
        let mut names = vec![
            "nndp".to_string(),
            "mean_stratum".to_string(),
            "mnde_global".to_string(),
            "mnde_shell".to_string(),
        ];
        for d in 1..=output_dim {
            names.push(format!("nde_{d}_global"));
        }
        for d in 1..=output_dim {
            names.push(format!("nde_{d}_shell"));
        }
        names
    }

    /// Metric values aligned with [`MetricSnapshot::metric_names`].
    pub fn metric_values(&self) -> Vec<Option<f64>> {
        let mut values = vec![
            Some(self.nndp as f64),
            Some(self.mean_stratum),
            self.mnde_global,
            self.mnde_shell,
        ];
        values.extend(self.nde_global.iter().copied());
        values.extend(self.nde_shell.iter().copied());
        values
    }
}

fn nde_at_axis(axis: usize, y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.len() < 2 {
        return Err(Error::DegenerateScope {
            axis,
            reason: format!("need at least 2 rows, got {}", y_true.len()),
        });
    }
    let mean = crate::matrix::mean(y_true);
    let denom: f64 = y_true.iter().map(|y| (y - mean) * (y - mean)).sum();
    if denom <= 0.0 {
        return Err(Error::DegenerateScope {
            axis,
            reason: "target column is constant".into(),
        });
    }
    let num: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    Ok((num / denom).sqrt())
}

/// Non-dimensional error of one output column: the residual sum of squares
/// over the centered sum of squares, square-rooted. Equals sqrt(1 - R²).
pub fn nde(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    nde_at_axis(0, y_true, y_pred)
}

/// Mean non-dimensional error across output columns.
pub fn mnde(y_true: &Matrix, y_pred: &Matrix) -> Result<f64> {
    if y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols() {
        return Err(Error::DimensionMismatch {
            expected: y_true.cols(),
            got: y_pred.cols(),
        });
    }
    let d = y_true.cols();
    let mut total = 0.0;
    for axis in 0..d {
        total += nde_at_axis(axis, &y_true.column(axis), &y_pred.column(axis))?;
    }
    Ok(total / d as f64)
}

/// MNDE over the requested scope, using canonical outputs as the truth.
///
/// `predictions` must cover the whole pool (canonical orientation). The
/// shell scope is the ground-truth shell of the full pool; it never depends
/// on model state.
pub fn scoped_mnde(pool: &LabeledPool, predictions: &Matrix, scope: ScopeSpec) -> Result<f64> {
    let rows = scope_rows(pool, scope)?;
    if predictions.rows() != pool.len() || predictions.cols() != pool.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: pool.len(),
            got: predictions.rows(),
        });
    }
    mnde(
        &pool.outputs_canonical().select_rows(&rows),
        &predictions.select_rows(&rows),
    )
}

/// Rows selected by a scope; errors if a shell restricts to fewer than two.
pub fn scope_rows(pool: &LabeledPool, scope: ScopeSpec) -> Result<Vec<usize>> {
    match scope {
        ScopeSpec::Global => Ok((0..pool.len()).collect()),
        ScopeSpec::Shell { depth } => {
            let rows = pool.truth().shell(depth)?;
            if rows.len() < 2 {
                return Err(Error::DegenerateScope {
                    axis: 0,
                    reason: format!("{depth}-shell holds {} row(s)", rows.len()),
                });
            }
            Ok(rows)
        }
    }
}

/// Number of acquired points on the ground-truth frontier (stratum 1).
pub fn nndp(acquired: &[usize], truth: &StrataIndex) -> usize {
    acquired.iter().filter(|&&i| truth.stratum_of(i) == 1).count()
}

/// Mean ground-truth stratum number over the acquired set.
pub fn mean_stratum(acquired: &[usize], truth: &StrataIndex) -> Result<f64> {
    if acquired.is_empty() {
        return Err(Error::invalid("mean stratum of an empty set"));
    }
    let total: usize = acquired.iter().map(|&i| truth.stratum_of(i)).sum();
    Ok(total as f64 / acquired.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::pareto::{compute_strata, ObjectiveSpec};

    fn four_point_pool() -> LabeledPool {
        // Strata: {(2,2),(1,3)} / {(1,1)} / {(0,0)}
        LabeledPool::new(
            "four",
            vec!["f".into()],
            Matrix::from_rows(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap(),
            Matrix::from_rows(vec![
                vec![2.0, 2.0],
                vec![1.0, 3.0],
                vec![0.0, 0.0],
                vec![1.0, 1.0],
            ])
            .unwrap(),
            ObjectiveSpec::all_maximize(2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn nde_hand_cases() {
        assert_eq!(nde(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        // Predicting the mean gives exactly 1: numerator and denominator coincide.
        let y = [1.0, 2.0, 4.5];
        let mean = crate::matrix::mean(&y);
        assert_eq!(nde(&y, &[mean, mean, mean]).unwrap(), 1.0);
        let got = nde(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((got - (0.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn nde_degenerate_cases() {
        assert!(matches!(
            nde(&[2.0, 2.0], &[1.0, 3.0]),
            Err(Error::DegenerateScope { .. })
        ));
        assert!(matches!(
            nde(&[2.0], &[1.0]),
            Err(Error::DegenerateScope { .. })
        ));
    }

    #[test]
    fn mnde_averages_columns() {
        let y = Matrix::from_rows(vec![vec![1.0, 5.0], vec![2.0, 6.0], vec![3.0, 7.0]]).unwrap();
        let mut p = y.clone();
        p.set(2, 0, 4.0); // perturb column 0 only: NDE = sqrt(1/2), column 1 perfect
        let got = mnde(&y, &p).unwrap();
        assert!((got - 0.5 * (0.5f64).sqrt()).abs() < 1e-15);
        assert!((got - 0.3536).abs() < 1e-4);
    }

    #[test]
    fn mnde_reports_offending_axis() {
        let y = Matrix::from_rows(vec![vec![1.0, 5.0], vec![2.0, 5.0]]).unwrap();
        match mnde(&y, &y) {
            Err(Error::DegenerateScope { axis, .. }) => assert_eq!(axis, 1),
            other => panic!("expected degenerate scope, got {other:?}"),
        }
    }

    #[test]
    fn scoped_mnde_shell_vs_global() {
        let pool = four_point_pool();
        // Exact on the frontier rows (0, 1), wrong only on row 2 = (0,0).
        let preds = Matrix::from_rows(vec![
            vec![2.0, 2.0],
            vec![1.0, 3.0],
            vec![5.0, 5.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let shell = scoped_mnde(&pool, &preds, ScopeSpec::Shell { depth: 1 }).unwrap();
        assert_eq!(shell, 0.0);
        let global = scoped_mnde(&pool, &preds, ScopeSpec::Global).unwrap();
        assert!(global > 0.0);
        // A deep enough shell exhausts the pool and equals global scope.
        let deep = scoped_mnde(&pool, &preds, ScopeSpec::Shell { depth: 99 }).unwrap();
        assert_eq!(deep, global);
    }

    #[test]
    fn nndp_and_mean_stratum_examples() {
        let pool = four_point_pool();
        let truth = pool.truth();
        assert_eq!(nndp(&[0, 1, 2, 3], truth), 2);
        assert_eq!(nndp(&[2], truth), 0);
        assert_eq!(nndp(&[1, 3], truth), 1);
        assert_eq!(mean_stratum(&[0, 2], truth).unwrap(), 2.0); // (1 + 3) / 2
        assert_eq!(mean_stratum(&[0, 1], truth).unwrap(), 1.0);
        assert!(mean_stratum(&[], truth).is_err());
    }

    #[test]
    fn exhausted_pool_mean_stratum_is_acquisition_independent() {
        let pts = Matrix::from_rows(vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![0.5, 0.7],
        ])
        .unwrap();
        let truth = compute_strata(&pts);
        let all: Vec<usize> = (0..4).collect();
        let shuffled = vec![3, 1, 0, 2];
        assert_eq!(
            mean_stratum(&all, &truth).unwrap(),
            mean_stratum(&shuffled, &truth).unwrap()
        );
    }
}
