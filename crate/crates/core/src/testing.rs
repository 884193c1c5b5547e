//! Seeded random instances shared by the unit tests, the self-test report and
//! the acceptance suite.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::Matrix;
use crate::tensor::Tensor;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform in `[-1, 1)`.
pub fn random_matrix(rng: &mut TestRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_complex_matrix(rng: &mut TestRng, rows: usize, cols: usize) -> Matrix<Complex64> {
    Matrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_tensor(rng: &mut TestRng, dims: &[usize]) -> Tensor {
    Tensor::from_fn(dims, |_| rng.gen_range(-1.0..1.0))
}

pub fn random_complex_tensor(rng: &mut TestRng, dims: &[usize]) -> Tensor<Complex64> {
    Tensor::from_fn(dims, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Random matrix rescaled to the requested 1-norm.
pub fn random_matrix_with_norm(rng: &mut TestRng, n: usize, norm1: f64) -> Matrix {
    let m = random_matrix(rng, n, n);
    let scale = norm1 / m.norm1();
    m.scaled(scale)
}

/// Random `n x n` matrix whose spectrum lies in `Re z <= -margin`.
///
/// Shifting by the 1-norm bounds every eigenvalue via Gershgorin.
pub fn random_stable_matrix(rng: &mut TestRng, n: usize, margin: f64) -> Matrix {
    let mut m = random_matrix(rng, n, n);
    let shift = m.norm1() + margin;
    m.add_identity(-shift);
    m
}
