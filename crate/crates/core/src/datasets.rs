//! Candidate pools: synthetic generators and ingestion of pre-featurized
//! CSV tables.
//!
//! A [`LabeledPool`] is the finite universe for retrospective active
//! learning: every candidate's features and outputs are known up front, and
//! ground-truth strata are computed once over the canonical outputs.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pareto::{compute_strata, Direction, ObjectiveAxis, ObjectiveSpec, StrataIndex};

/// Fully labeled candidate pool with precomputed ground-truth strata.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPool {
    name: String,
    feature_names: Vec<String>,
    x: Matrix,
    y_raw: Matrix,
    y_canon: Matrix,
    spec: ObjectiveSpec,
    truth: StrataIndex,
}

impl LabeledPool {
    /// Build a pool from raw-orientation outputs. Minimize axes are negated
    /// once here; all downstream logic maximizes.
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        x: Matrix,
        y_raw: Matrix,
        spec: ObjectiveSpec,
    ) -> Result<Self> {
        if x.rows() < 2 {
            return Err(Error::invalid("pool needs at least 2 candidates"));
        }
        if y_raw.rows() != x.rows() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                got: y_raw.rows(),
            });
        }
        if y_raw.cols() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: y_raw.cols(),
            });
        }
        if feature_names.len() != x.cols() {
            return Err(Error::DimensionMismatch {
                expected: x.cols(),
                got: feature_names.len(),
            });
        }
        if !x.all_finite() || !y_raw.all_finite() {
            return Err(Error::invalid("pool contains non-finite values"));
        }
        let mut y_canon = Matrix::zeros(y_raw.rows(), y_raw.cols());
        for i in 0..y_raw.rows() {
            let canon = spec.canonicalize(y_raw.row(i))?;
            for (d, v) in canon.into_iter().enumerate() {
                y_canon.set(i, d, v);
            }
        }
        let truth = compute_strata(&y_canon);
        Ok(LabeledPool {
            name: name.into(),
            feature_names,
            x,
            y_raw,
            y_canon,
            spec,
            truth,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        false // a pool always has at least 2 rows
    }

    pub fn feature_dim(&self) -> usize {
        self.x.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Matrix {
        &self.x
    }

    pub fn outputs_raw(&self) -> &Matrix {
        &self.y_raw
    }

    pub fn outputs_canonical(&self) -> &Matrix {
        &self.y_canon
    }

    pub fn objective_spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn truth(&self) -> &StrataIndex {
        &self.truth
    }
}

/// Synthetic pool family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    Linear,
    Circular,
    Hyperbolic,
    Bat,
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SyntheticKind::Linear => "linear",
            SyntheticKind::Circular => "circular",
            SyntheticKind::Hyperbolic => "hyperbolic",
            SyntheticKind::Bat => "bat",
        };
        f.write_str(s)
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(SyntheticKind::Linear),
            "circular" => Ok(SyntheticKind::Circular),
            "hyperbolic" => Ok(SyntheticKind::Hyperbolic),
            "bat" => Ok(SyntheticKind::Bat),
            other => Err(Error::invalid(format!("unknown synthetic case `{other}`"))),
        }
    }
}

/// Generate a synthetic pool. Identical `(kind, n, seed)` always produce an
/// identical pool.
pub fn generate(kind: SyntheticKind, n: usize, seed: u64) -> Result<LabeledPool> {
    match kind {
        SyntheticKind::Linear => gen_linear(n, seed),
        SyntheticKind::Circular => gen_circular(n, seed),
        SyntheticKind::Hyperbolic => gen_hyperbolic(n, seed),
        SyntheticKind::Bat => gen_bat(n, seed),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("pool size must be at least 2"));
    }
    Ok(())
}

fn build_synthetic(
    kind: SyntheticKind,
    x_rows: Vec<Vec<f64>>,
    y_rows: Vec<Vec<f64>>,
) -> Result<LabeledPool> {
    LabeledPool::new(
        kind.to_string(),
        vec!["x1".to_string(), "x2".to_string()],
        Matrix::from_rows(x_rows)?,
        Matrix::from_rows(y_rows)?,
        ObjectiveSpec::all_maximize(2)?,
    )
}

/// Rotated-square geometry with a linear frontier:
/// features uniform on the unit square, outputs `(x1 - x2, x1 + x2)`.
pub fn gen_linear(n: usize, seed: u64) -> Result<LabeledPool> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x1: f64 = rng.gen();
        let x2: f64 = rng.gen();
        xs.push(vec![x1, x2]);
        ys.push(vec![x1 - x2, x1 + x2]);
    }
    build_synthetic(SyntheticKind::Linear, xs, ys)
}

/// Convex quarter-circle frontier: radius uniform on [0,1], angle uniform on
/// [0, pi/2], outputs `(r cos a, r sin a)`.
pub fn gen_circular(n: usize, seed: u64) -> Result<LabeledPool> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let r: f64 = rng.gen();
        let a: f64 = rng.gen::<f64>() * std::f64::consts::FRAC_PI_2;
        xs.push(vec![r, a]);
        ys.push(vec![r * a.cos(), r * a.sin()]);
    }
    build_synthetic(SyntheticKind::Circular, xs, ys)
}

/// Sparse frontier: features uniform on [0,10]^2, outputs `(1/x1, 1/x2)`.
/// Draws below 1e-6 are resampled rather than clipped, so no artificial
/// frontier ties appear.
pub fn gen_hyperbolic(n: usize, seed: u64) -> Result<LabeledPool> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| loop {
        let v: f64 = rng.gen::<f64>() * 10.0;
        if v >= 1e-6 {
            return v;
        }
    };
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = draw(&mut rng);
        let x2 = draw(&mut rng);
        xs.push(vec![x1, x2]);
        ys.push(vec![1.0 / x1, 1.0 / x2]);
    }
    build_synthetic(SyntheticKind::Hyperbolic, xs, ys)
}

/// Non-convex ("bat") frontier: the circular radius is perturbed by the
/// angular distance from the diagonal, `r = x1 + 2|a - pi/4|`.
pub fn gen_bat(n: usize, seed: u64) -> Result<LabeledPool> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x1: f64 = rng.gen();
        let a: f64 = rng.gen::<f64>() * std::f64::consts::FRAC_PI_2;
        let r = x1 + 2.0 * (a - std::f64::consts::FRAC_PI_4).abs();
        xs.push(vec![x1, a]);
        ys.push(vec![r * a.cos(), r * a.sin()]);
    }
    build_synthetic(SyntheticKind::Bat, xs, ys)
}

/// Per-output transform applied at ingestion, before orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputTransform {
    #[default]
    Identity,
    Square,
}

impl OutputTransform {
    fn apply(self, v: f64) -> f64 {
        match self {
            OutputTransform::Identity => v,
            OutputTransform::Square => v * v,
        }
    }
}

/// One output column of a CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputColumnSpec {
    /// Header of the column in the file.
    pub column: String,
    pub direction: Direction,
    #[serde(default)]
    pub transform: OutputTransform,
    /// Axis name; defaults to the column header.
    #[serde(default)]
    pub name: Option<String>,
}

/// Column mapping for ingesting a pre-featurized table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvPoolSpec {
    pub path: String,
    pub features: Vec<String>,
    pub outputs: Vec<OutputColumnSpec>,
    #[serde(default)]
    pub name: Option<String>,
}

/// Parse a numeric table into a pool.
///
/// Transforms are applied per output, then Minimize axes are negated into
/// canonical orientation and ground-truth strata computed. Rows with a
/// missing (empty) or non-finite value are dropped with a logged count; a
/// cell that holds non-numeric text is a hard parse error.
pub fn load_csv_pool(path: &Path, spec: &CsvPoolSpec) -> Result<LabeledPool> {
    if spec.features.is_empty() {
        return Err(Error::Schema("no feature columns configured".into()));
    }
    if spec.outputs.is_empty() {
        return Err(Error::Schema("no output columns configured".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    let mut index_of = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        index_of.entry(h.clone()).or_insert(i);
    }
    let locate = |column: &str| -> Result<usize> {
        index_of
            .get(column)
            .copied()
            .ok_or_else(|| Error::Schema(format!("missing column `{column}`")))
    };
    let feature_idx: Vec<usize> = spec
        .features
        .iter()
        .map(|c| locate(c))
        .collect::<Result<_>>()?;
    let output_idx: Vec<usize> = spec
        .outputs
        .iter()
        .map(|o| locate(&o.column))
        .collect::<Result<_>>()?;

    let axes = spec
        .outputs
        .iter()
        .map(|o| ObjectiveAxis {
            name: o.name.clone().unwrap_or_else(|| o.column.clone()),
            direction: o.direction,
        })
        .collect();
    let objective = ObjectiveSpec::from_axes(axes)?;

    let mut x_rows = Vec::new();
    let mut y_rows = Vec::new();
    let mut dropped = 0usize;
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |col: usize| -> Result<Option<f64>> {
            let raw = record.get(col).unwrap_or("");
            if raw.is_empty() {
                return Ok(None); // missing value: drop the row below
            }
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row: row_no + 2, // 1-based, counting the header line
                column: headers[col].clone(),
                message: format!("`{raw}` is not a number"),
            })?;
            Ok(Some(v))
        };
        let mut x = Vec::with_capacity(feature_idx.len());
        let mut y = Vec::with_capacity(output_idx.len());
        let mut usable = true;
        for &c in &feature_idx {
            match cell(c)? {
                Some(v) if v.is_finite() => x.push(v),
                _ => {
                    usable = false;
                    break;
                }
            }
        }
        if usable {
            for (&c, o) in output_idx.iter().zip(&spec.outputs) {
                match cell(c)? {
                    Some(v) => {
                        let t = o.transform.apply(v);
                        if t.is_finite() {
                            y.push(t);
                        } else {
                            usable = false;
                            break;
                        }
                    }
                    None => {
                        usable = false;
                        break;
                    }
                }
            }
        }
        if usable {
            x_rows.push(x);
            y_rows.push(y);
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::warn!(
            "dropped {dropped} row(s) with missing or non-finite values from {}",
            path.display()
        );
    }
    if x_rows.is_empty() {
        return Err(Error::EmptyPool(format!(
            "no usable rows in {}",
            path.display()
        )));
    }
    let name = spec.name.clone().unwrap_or_else(|| {
        Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "csv-pool".to_string())
    });
    LabeledPool::new(
        name,
        spec.features.clone(),
        Matrix::from_rows(x_rows)?,
        Matrix::from_rows(y_rows)?,
        objective,
    )
}

/// Where a pool came from; recorded in the metadata sidecar so experiments
/// can be regenerated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PoolSource {
    Synthetic { case: SyntheticKind, seed: u64 },
    Csv { path: String },
}

/// JSON sidecar written next to the features/outputs CSV pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolMeta {
    pub name: String,
    pub n: usize,
    pub feature_names: Vec<String>,
    pub axes: Vec<ObjectiveAxis>,
    pub source: PoolSource,
}

pub const FEATURES_FILE: &str = "features.csv";
pub const OUTPUTS_FILE: &str = "outputs.csv";
pub const META_FILE: &str = "pool.json";

/// Serialize a pool as a CSV pair plus metadata sidecar.
///
/// Outputs are written in raw orientation; numbers use the shortest decimal
/// form that parses back to the identical float, so a save/load round trip
/// is exact.
pub fn save_pool(pool: &LabeledPool, dir: &Path, source: &PoolSource) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut fw = csv::Writer::from_path(dir.join(FEATURES_FILE))?;
    fw.write_record(pool.feature_names())?;
    for row in pool.features().iter_rows() {
        fw.write_record(row.iter().map(|v| v.to_string()))?;
    }
    fw.flush()?;

    let mut ow = csv::Writer::from_path(dir.join(OUTPUTS_FILE))?;
    ow.write_record(pool.objective_spec().axes().iter().map(|a| a.name.as_str()))?;
    for row in pool.outputs_raw().iter_rows() {
        ow.write_record(row.iter().map(|v| v.to_string()))?;
    }
    ow.flush()?;

    let meta = PoolMeta {
        name: pool.name().to_string(),
        n: pool.len(),
        feature_names: pool.feature_names().to_vec(),
        axes: pool.objective_spec().axes().to_vec(),
        source: source.clone(),
    };
    let mut body = serde_json::to_string_pretty(&meta)?;
    body.push('\n');
    std::fs::write(dir.join(META_FILE), body)?;
    Ok(())
}

/// Load a pool previously written by [`save_pool`].
pub fn load_pool(dir: &Path) -> Result<LabeledPool> {
    let meta: PoolMeta = serde_json::from_str(&std::fs::read_to_string(dir.join(META_FILE))?)?;
    let x = read_numeric_csv(&dir.join(FEATURES_FILE), &meta.feature_names)?;
    let expected: Vec<String> = meta.axes.iter().map(|a| a.name.clone()).collect();
    let y = read_numeric_csv(&dir.join(OUTPUTS_FILE), &expected)?;
    LabeledPool::new(
        meta.name,
        meta.feature_names,
        x,
        y,
        ObjectiveSpec::from_axes(meta.axes)?,
    )
}

fn read_numeric_csv(path: &Path, expected_headers: &[String]) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    if headers != expected_headers {
        return Err(Error::Schema(format!(
            "{}: headers {:?} do not match metadata {:?}",
            path.display(),
            headers,
            expected_headers
        )));
    }
    let mut rows = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(headers.len());
        for (col, raw) in record.iter().enumerate() {
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row: row_no + 2,
                column: headers[col].clone(),
                message: format!("`{raw}` is not a number"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyPool(format!("no rows in {}", path.display())));
    }
    Matrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_rows_satisfy_construction_identities() {
        let pool = gen_linear(200, 3).unwrap();
        for i in 0..pool.len() {
            let x = pool.features().row(i);
            let y = pool.outputs_raw().row(i);
            let s = y[0] + y[1]; // = 2 x1
            let d = y[1] - y[0]; // = 2 x2
            assert!((s - 2.0 * x[0]).abs() < 1e-12);
            assert!((d - 2.0 * x[1]).abs() < 1e-12);
            assert!((0.0..=2.0).contains(&s));
            assert!((0.0..=2.0).contains(&d));
        }
    }

    #[test]
    fn circular_rows_lie_in_unit_quarter_disk() {
        let pool = gen_circular(200, 4).unwrap();
        for i in 0..pool.len() {
            let x = pool.features().row(i);
            let y = pool.outputs_raw().row(i);
            let r2 = y[0] * y[0] + y[1] * y[1];
            assert!((r2 - x[0] * x[0]).abs() < 1e-12);
            assert!(r2 <= 1.0 + 1e-12);
            assert!(y[0] >= 0.0 && y[1] >= 0.0);
        }
    }

    #[test]
    fn hyperbolic_outputs_bounded_below() {
        let pool = gen_hyperbolic(200, 5).unwrap();
        for row in pool.outputs_raw().iter_rows() {
            assert!(row[0] > 0.1 - 1e-9);
            assert!(row[1] > 0.1 - 1e-9);
        }
    }

    #[test]
    fn bat_radius_bounded() {
        let pool = gen_bat(200, 6).unwrap();
        let bound = 1.0 + std::f64::consts::FRAC_PI_2;
        for row in pool.outputs_raw().iter_rows() {
            let r = (row[0] * row[0] + row[1] * row[1]).sqrt();
            assert!(r <= bound + 1e-12);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in [
            SyntheticKind::Linear,
            SyntheticKind::Circular,
            SyntheticKind::Hyperbolic,
            SyntheticKind::Bat,
        ] {
            let a = generate(kind, 64, 99).unwrap();
            let b = generate(kind, 64, 99).unwrap();
            assert_eq!(a, b, "{kind} pools differ across identical generations");
        }
    }

    #[test]
    fn tiny_pools_rejected() {
        assert!(gen_linear(1, 0).is_err());
        assert!(gen_linear(0, 0).is_err());
    }

    #[test]
    fn canonical_raw_round_trip() {
        let spec = ObjectiveSpec::new(vec![("a", Direction::Maximize), ("b", Direction::Minimize)])
            .unwrap();
        let pool = LabeledPool::new(
            "t",
            vec!["f".into()],
            Matrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap(),
            Matrix::from_rows(vec![vec![1.5, -2.5], vec![0.5, 3.25]]).unwrap(),
            spec,
        )
        .unwrap();
        for i in 0..pool.len() {
            let back = pool
                .objective_spec()
                .to_raw(pool.outputs_canonical().row(i))
                .unwrap();
            assert_eq!(back, pool.outputs_raw().row(i));
        }
    }
}
