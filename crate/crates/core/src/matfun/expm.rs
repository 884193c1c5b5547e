//! Matrix exponential by diagonal Padé approximation with scaling and squaring.
//!
//! Degrees 3, 5, 7 and 9 are used unscaled when the 1-norm is below the
//! corresponding backward-error threshold; otherwise the matrix is scaled so
//! the degree-13 approximant applies and the result is squared back.

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{gemm_into, Matrix};
use crate::scalar::Scalar;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `e^X` for a square matrix with finite entries.
pub fn expm<T: Scalar>(x: &Matrix<T>) -> Result<Matrix<T>> {
    if !x.is_square() {
        return Err(Error::dim(format!(
            "expm needs a square matrix, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    if !x.is_finite() {
        return Err(Error::Validation(
            "expm input has non-finite entries".into(),
        ));
    }
    let norm = x.norm1();
    for &(m, theta) in &THETA {
        if norm <= theta {
            return pade_low(x, m);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as u32;
    let scaled = if s > 0 {
        x.scaled(T::from_real(0.5f64.powi(s as i32)))
    } else {
        x.clone()
    };
    let mut e = pade13(&scaled)?;
    for _ in 0..s {
        e = e.matmul(&e)?;
    }
    Ok(e)
}

fn pade_low<T: Scalar>(a: &Matrix<T>, m: usize) -> Result<Matrix<T>> {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        9 => &B9,
        _ => unreachable!("unsupported Padé degree {m}"),
    };
    let n = a.rows();
    let a2 = a.matmul(a)?;
    // Even powers I, A², A⁴, …
    let mut powers = vec![Matrix::identity(n), a2.clone()];
    while powers.len() < m.div_ceil(2) {
        let next = powers.last().unwrap().matmul(&a2)?;
        powers.push(next);
    }
    let mut u_inner = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    for (j, p) in powers.iter().enumerate() {
        v.axpy(T::from_real(b[2 * j]), p)?;
        u_inner.axpy(T::from_real(b[2 * j + 1]), p)?;
    }
    let u = a.matmul(&u_inner)?;
    solve_pade(u, v)
}

fn pade13<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let b = |i: usize| T::from_real(B13[i]);
    let a2 = a.matmul(a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;

    let mut w1 = a6.scaled(b(13));
    w1.axpy(b(11), &a4)?;
    w1.axpy(b(9), &a2)?;
    let mut w = a6.scaled(b(7));
    w.axpy(b(5), &a4)?;
    w.axpy(b(3), &a2)?;
    w.add_identity(b(1));
    gemm_into(T::one(), &a6, &w1, T::one(), &mut w);
    let u = a.matmul(&w)?;

    let mut z1 = a6.scaled(b(12));
    z1.axpy(b(10), &a4)?;
    z1.axpy(b(8), &a2)?;
    let mut v = a6.scaled(b(6));
    v.axpy(b(4), &a4)?;
    v.axpy(b(2), &a2)?;
    v.add_identity(b(0));
    gemm_into(T::one(), &a6, &z1, T::one(), &mut v);
    debug_assert_eq!(v.rows(), n);
    solve_pade(u, v)
}

/// `(V - U)^{-1} (V + U)`.
fn solve_pade<T: Scalar>(u: Matrix<T>, v: Matrix<T>) -> Result<Matrix<T>> {
    let p = v.add(&u)?;
    let q = v.sub(&u)?;
    linalg::solve(q, p)
}
