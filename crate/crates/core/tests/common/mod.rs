#![allow(dead_code)]

use cmdsdml::{LabeledDataset, Matrix};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut SplitMix64, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn symmetric(rng: &mut SplitMix64, n: usize) -> Matrix<f64> {
    gaussian(rng, n, n).symmetrized()
}

/// `n` points, `labels` drawn from `0..m`, sorted so equal labels are
/// contiguous.
pub fn labelled(rng: &mut SplitMix64, n: usize, d: usize, m: usize) -> LabeledDataset<f64> {
    let x = gaussian(rng, n, d);
    let labels = (0..n).map(|_| rng.random_range(0..m) as f64).collect();
    LabeledDataset::new(x, labels).unwrap().grouped()
}

pub fn to_na(m: &Matrix<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn max_abs_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    a.sub(b).unwrap().max_abs()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}
