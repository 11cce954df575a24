//! Dominance, Pareto frontier, recursive strata, and s-shells over finite
//! point sets.
//!
//! Everything in this module works in a canonical maximize-everything
//! orientation: axes to be minimized are negated once at ingestion (see
//! [`ObjectiveSpec::canonicalize`]), so there is a single dominance code
//! path. Comparisons are exact — equal points never dominate each other and
//! always land in the same stratum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Direction of optimization for one output axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

/// One named output axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveAxis {
    pub name: String,
    pub direction: Direction,
}

/// Names and optimization directions of the D output axes.
///
/// Fixes the sign convention for all dominance logic: canonical values are
/// raw values with Minimize axes negated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    axes: Vec<ObjectiveAxis>,
}

impl ObjectiveSpec {
    pub fn new(axes: Vec<(&str, Direction)>) -> Result<Self> {
        Self::from_axes(
            axes.into_iter()
                .map(|(name, direction)| ObjectiveAxis {
                    name: name.to_string(),
                    direction,
                })
                .collect(),
        )
    }

    pub fn from_axes(axes: Vec<ObjectiveAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("objective spec needs at least one axis"));
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::invalid(format!("duplicate axis name `{}`", a.name)));
            }
        }
        Ok(ObjectiveSpec { axes })
    }

    /// All axes maximized, named `y1..yD`.
    pub fn all_maximize(d: usize) -> Result<Self> {
        Self::from_axes(
            (1..=d)
                .map(|i| ObjectiveAxis {
                    name: format!("y{i}"),
                    direction: Direction::Maximize,
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[ObjectiveAxis] {
        &self.axes
    }

    /// Raw orientation -> canonical (maximize-everything) orientation.
    pub fn canonicalize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: raw.len(),
            });
        }
        Ok(raw
            .iter()
            .zip(&self.axes)
            .map(|(&v, a)| match a.direction {
                Direction::Maximize => v,
                Direction::Minimize => -v,
            })
            .collect())
    }

    /// Canonical orientation back to raw; negation is its own inverse.
    pub fn to_raw(&self, canonical: &[f64]) -> Result<Vec<f64>> {
        self.canonicalize(canonical)
    }
}

/// True iff `a` dominates `b` in canonical orientation: at least as large on
/// every axis and strictly larger on some axis. Never true for `a == b`.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(dominates_unchecked(a, b))
}

/// Dominance without the dimension check; callers guarantee equal lengths.
#[inline]
pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (&av, &bv) in a.iter().zip(b.iter()) {
        if av < bv {
            return false;
        }
        if av > bv {
            strict = true;
        }
    }
    strict
}

/// Indices of the points dominated by no other point in the set.
///
/// Duplicated points that are frontier-equal all appear (equal points never
/// dominate each other). Emptiness and ragged rows are unrepresentable in
/// [`Matrix`], which enforces this operation's preconditions.
pub fn pareto_frontier(points: &Matrix) -> Vec<usize> {
    let n = points.rows();
    let mut out = Vec::new();
    'candidate: for i in 0..n {
        for j in 0..n {
            if j != i && dominates_unchecked(points.row(j), points.row(i)) {
                continue 'candidate;
            }
        }
        out.push(i);
    }
    out
}

/// Partition of point indices into strata 1..S with per-point stratum
/// numbers. Stratum 1 is the Pareto frontier; stratum s is the frontier of
/// what remains after removing all earlier strata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrataIndex {
    strata: Vec<Vec<usize>>,
    stratum_of: Vec<usize>,
}

impl StrataIndex {
    /// Number of points covered by the partition.
    pub fn len(&self) -> usize {
        self.stratum_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stratum_of.is_empty()
    }

    /// Number of strata S.
    pub fn stratum_count(&self) -> usize {
        self.strata.len()
    }

    /// Index sets S_1..S_S, each sorted ascending.
    pub fn strata(&self) -> &[Vec<usize>] {
        &self.strata
    }

    /// Ground-truth frontier, i.e. stratum 1.
    pub fn frontier(&self) -> &[usize] {
        &self.strata[0]
    }

    /// Stratum number s(y) >= 1 of a point.
    pub fn stratum_of(&self, index: usize) -> usize {
        self.stratum_of[index]
    }

    /// The s-shell: union of strata 1..min(s, S), sorted ascending.
    pub fn shell(&self, s: usize) -> Result<Vec<usize>> {
        if s == 0 {
            return Err(Error::invalid("shell depth must be at least 1"));
        }
        let take = s.min(self.strata.len());
        let mut out: Vec<usize> = self.strata[..take].iter().flatten().copied().collect();
        out.sort_unstable();
        Ok(out)
    }
}

/// Recursive non-dominated sorting of a finite point set.
///
/// Uses dominance counting: each point tracks how many points dominate it
/// and which points it dominates; stripping a stratum decrements the counts
/// of everything it dominates. Equivalent to repeatedly extracting the
/// frontier, but touches each dominance pair once.
pub fn compute_strata(points: &Matrix) -> StrataIndex {
    let n = points.rows();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];

    for i in 0..n {
        for j in (i + 1)..n {
            if dominates_unchecked(points.row(i), points.row(j)) {
                dominated[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_unchecked(points.row(j), points.row(i)) {
                dominated[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut stratum_of = vec![0usize; n];
    let mut strata = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut s = 1;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            stratum_of[i] = s;
            for &j in &dominated[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        current.sort_unstable();
        strata.push(std::mem::take(&mut current));
        current = next;
        s += 1;
    }

    StrataIndex { strata, stratum_of }
}
