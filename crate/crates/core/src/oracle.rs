//! Brute-force references for validation on small instances.
//!
//! Everything here avoids the production code paths on purpose: Kronecker sums
//! are assembled entry by entry, and φ-functions come from truncated Taylor
//! series rather than quadrature or Padé approximants.

use crate::error::{Error, Result};
use crate::matfun::factorial;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tensor::{KroneckerSum, Tensor};

/// Largest `N` that [`assemble_kronsum`] accepts.
pub const MAX_DENSE_SIZE: usize = 10_000;

const TERM_TOL: f64 = 1e-17;
const MAX_TERMS: usize = 200;

/// Explicitly assembled `N x N` Kronecker sum.
#[derive(Clone, Debug)]
pub struct DenseOperator<T: Scalar = f64> {
    dims: Vec<usize>,
    matrix: Matrix<T>,
}

impl<T: Scalar> DenseOperator<T> {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// Tensor shape whose `vec` this operator acts on.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn apply(&self, t: &Tensor<T>) -> Result<Tensor<T>> {
        self.check(t)?;
        Tensor::unvec(self.matrix.matvec(t.vec())?, &self.dims)
    }

    /// `φ_ℓ(M) vec(t)` by [`phi_taylor_action`].
    pub fn phi_action(&self, ell: usize, t: &Tensor<T>) -> Result<Tensor<T>> {
        self.check(t)?;
        Tensor::unvec(phi_taylor_action(&self.matrix, ell, t.vec())?, &self.dims)
    }

    fn check(&self, t: &Tensor<T>) -> Result<()> {
        if t.dims() != self.dims.as_slice() {
            return Err(Error::dim(format!(
                "operator acts on {:?}, got tensor {:?}",
                self.dims,
                t.dims()
            )));
        }
        Ok(())
    }
}

/// `Σ_μ I_d ⊗ … ⊗ A_μ ⊗ … ⊗ I_1` as a dense matrix.
pub fn assemble_kronsum<T: Scalar>(k: &KroneckerSum<T>) -> Result<DenseOperator<T>> {
    let dims = k.dims();
    let n = k.size();
    if n > MAX_DENSE_SIZE {
        return Err(Error::TooLarge {
            size: n,
            limit: MAX_DENSE_SIZE,
        });
    }
    let mut m = Matrix::zeros(n, n);
    let mut strides = Vec::with_capacity(dims.len());
    let mut s = 1;
    for &d in &dims {
        strides.push(s);
        s *= d;
    }
    for col in 0..n {
        for (mu, a) in k.factors().iter().enumerate() {
            let j_mu = (col / strides[mu]) % dims[mu];
            let base = col - j_mu * strides[mu];
            for i_mu in 0..dims[mu] {
                m[(base + i_mu * strides[mu], col)] += a[(i_mu, j_mu)];
            }
        }
    }
    Ok(DenseOperator { dims, matrix: m })
}

/// `φ_ℓ(M) v` from Taylor series.
///
/// The action is carried out on the augmented matrix
/// `[[M, v e_1ᵀ], [0, J]]` (with `J` the `ℓ x ℓ` shift), whose exponential
/// applied to the last unit vector has `φ_ℓ(M) v` as its leading block. The
/// exponential is propagated over `2^s` substeps with `‖augmented‖₁ / 2^s < 1/2`,
/// each summed as a Taylor series until the next term drops below `1e-17`
/// relative to the partial sum.
pub fn phi_taylor_action<T: Scalar>(m: &Matrix<T>, ell: usize, v: &[T]) -> Result<Vec<T>> {
    let norm = augmented_norm(m, ell);
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) >= 0.5 {
        s += 1;
    }
    phi_taylor_action_scaled(m, ell, v, s)
}

/// [`phi_taylor_action`] with an explicit number `s` of halvings.
pub fn phi_taylor_action_scaled<T: Scalar>(
    m: &Matrix<T>,
    ell: usize,
    v: &[T],
    s: u32,
) -> Result<Vec<T>> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "φ action needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if v.len() != n {
        return Err(Error::dim(format!(
            "vector of length {} against {n}x{n} matrix",
            v.len()
        )));
    }
    if !m.is_finite() || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation(
            "non-finite input to the Taylor oracle".into(),
        ));
    }
    let beta: f64 = v.iter().map(|x| x.modulus()).sum();
    if beta == 0.0 {
        return Ok(vec![T::zero(); n]);
    }
    let w: Vec<T> = v.iter().map(|&x| x * T::from_real(1.0 / beta)).collect();

    // State (x, c): x has length n, c has length ell.
    let mut x = vec![T::zero(); n];
    let mut c = vec![T::zero(); ell];
    if ell == 0 {
        x.copy_from_slice(&w);
    } else {
        c[ell - 1] = T::one();
    }
    let h = T::from_real(0.5f64.powi(s as i32));
    let substeps = 1u64 << s;
    for _ in 0..substeps {
        let mut tx = x.clone();
        let mut tc = c.clone();
        let mut converged = false;
        for k in 1..=MAX_TERMS {
            // (tx, tc) <- h B (tx, tc) / k
            let mut nx = m.matvec(&tx)?;
            if ell > 0 {
                let c0 = tc[0];
                for (a, &b) in nx.iter_mut().zip(&w) {
                    *a += c0 * b;
                }
            }
            let scale = h * T::from_real(1.0 / k as f64);
            for a in nx.iter_mut() {
                *a *= scale;
            }
            let mut nc = vec![T::zero(); ell];
            for i in 0..ell.saturating_sub(1) {
                nc[i] = tc[i + 1] * scale;
            }
            tx = nx;
            tc = nc;
            for (a, &b) in x.iter_mut().zip(&tx) {
                *a += b;
            }
            for (a, &b) in c.iter_mut().zip(&tc) {
                *a += b;
            }
            let term = norm2(&tx) + norm2(&tc);
            let total = norm2(&x) + norm2(&c);
            if term <= TERM_TOL * total {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Taylor series did not converge in {MAX_TERMS} terms"
            )));
        }
    }
    Ok(x.into_iter().map(|a| a * T::from_real(beta)).collect())
}

/// `φ_ℓ(X)` column by column from [`phi_taylor_action`].
pub fn phi_taylor_matrix<T: Scalar>(x: &Matrix<T>, ell: usize) -> Result<Matrix<T>> {
    let n = x.rows();
    let mut out = Matrix::zeros(n, n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        let col = phi_taylor_action(x, ell, &e)?;
        for (i, v) in col.into_iter().enumerate() {
            out[(i, j)] = v;
        }
        e[j] = T::zero();
    }
    Ok(out)
}

/// `e^X` by scaled truncated Taylor series and repeated squaring.
pub fn expm_taylor<T: Scalar>(x: &Matrix<T>) -> Result<Matrix<T>> {
    if !x.is_square() {
        return Err(Error::dim("expm oracle needs a square matrix"));
    }
    let norm = x.norm1();
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) >= 0.5 {
        s += 1;
    }
    let y = x.scaled(T::from_real(0.5f64.powi(s as i32)));
    let n = x.rows();
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    let mut converged = false;
    for k in 1..=MAX_TERMS {
        term = y.matmul(&term)?.scaled(T::from_real(1.0 / k as f64));
        sum.axpy(T::one(), &term)?;
        if term.norm_fro() <= TERM_TOL * sum.norm_fro() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(
            "Taylor series for expm did not converge".into(),
        ));
    }
    for _ in 0..s {
        sum = sum.matmul(&sum)?;
    }
    Ok(sum)
}

fn augmented_norm<T: Scalar>(m: &Matrix<T>, ell: usize) -> f64 {
    let base = m.norm1();
    if ell == 0 {
        base
    } else {
        base.max(1.0)
    }
}

fn norm2<T: Scalar>(v: &[T]) -> f64 {
    v.iter()
        .map(|x| {
            let a = x.modulus();
            a * a
        })
        .sum::<f64>()
        .sqrt()
}

/// `v / ℓ!`, the value of `φ_ℓ(0) v`.
pub fn phi_at_zero<T: Scalar>(ell: usize, v: &[T]) -> Vec<T> {
    let f = T::from_real(1.0 / factorial(ell));
    v.iter().map(|&x| x * f).collect()
}
