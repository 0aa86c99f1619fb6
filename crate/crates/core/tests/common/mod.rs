#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ays_rl::nn::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Central difference of `f` at every entry of `x`.
pub fn numeric_grad(x: &Matrix, h: f64, mut f: impl FnMut(&Matrix) -> f64) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    let mut probe = x.clone();
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            let orig = x.get(i, j);
            probe.set(i, j, orig + h);
            let up = f(&probe);
            probe.set(i, j, orig - h);
            let down = f(&probe);
            probe.set(i, j, orig);
            out.set(i, j, (up - down) / (2.0 * h));
        }
    }
    out
}

pub fn max_rel_err(analytic: &Matrix, numeric: &Matrix, floor: f64) -> f64 {
    analytic
        .data()
        .iter()
        .zip(numeric.data())
        .map(|(a, n)| rel_err(*a, *n, floor))
        .fold(0.0, f64::max)
}

/// Pearson χ² of observed counts against expected probabilities.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .filter(|(_, p)| **p > 0.0)
        .map(|(c, p)| {
            let e = p * total as f64;
            (*c as f64 - e).powi(2) / e
        })
        .sum()
}

/// χ² quantile at p = 0.0027 (the two-sided 3σ level) by degrees of freedom.
pub fn chi_square_3sigma(dof: usize) -> f64 {
    const TABLE: [f64; 10] = [9.0, 11.83, 14.16, 16.25, 18.21, 20.06, 21.85, 23.57, 25.26, 26.90];
    TABLE[dof - 1]
}
pub mod chain;
