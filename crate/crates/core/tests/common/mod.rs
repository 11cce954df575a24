//! Independent oracles shared by the property and acceptance suites.
//!
//! These deliberately re-derive results along different routes than the
//! library: strata by literally stripping frontiers, the normal CDF by
//! quadrature, R-squared from its textbook formula.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stratal::matrix::Matrix;

/// Exhaustive pairwise frontier: a point survives iff no other point is at
/// least as large everywhere and strictly larger somewhere.
pub fn oracle_frontier(points: &[Vec<f64>]) -> Vec<usize> {
    let dominates = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
    };
    (0..points.len())
        .filter(|&i| {
            !points
                .iter()
                .enumerate()
                .any(|(j, p)| j != i && dominates(p, &points[i]))
        })
        .collect()
}

/// Strata by repeatedly stripping the frontier of whatever remains.
/// Returns 1-based stratum numbers per point.
pub fn oracle_strata(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut stratum = vec![0usize; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut s = 1;
    while !remaining.is_empty() {
        let sub: Vec<Vec<f64>> = remaining.iter().map(|&i| points[i].clone()).collect();
        let front = oracle_frontier(&sub);
        let front_global: Vec<usize> = front.iter().map(|&j| remaining[j]).collect();
        for &i in &front_global {
            stratum[i] = s;
        }
        remaining.retain(|i| !front_global.contains(i));
        s += 1;
    }
    stratum
}

/// Standard normal CDF by Simpson's rule on the density, integrating from
/// -12 (or to +12 via symmetry). Accurate well past 1e-12 for |x| <= 8.
pub fn oracle_normal_cdf(x: f64) -> f64 {
    if x > 0.0 {
        return 1.0 - oracle_normal_cdf(-x);
    }
    if x < -12.0 {
        return 0.0;
    }
    let lo = -12.0f64;
    let steps = 40_000usize; // even
    let h = (x - lo) / steps as f64;
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = density(lo) + density(x);
    for i in 1..steps {
        let t = lo + h * i as f64;
        acc += density(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Textbook coefficient of determination.
pub fn oracle_r_squared(y: &[f64], pred: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - mean) * (a - mean)).sum();
    1.0 - ss_res / ss_tot
}

/// Uniform random point cloud for oracle comparisons.
pub fn random_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

pub fn to_matrix(points: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(points.to_vec()).unwrap()
}
