//! Joint evaluation of `φ_0(X), …, φ_ℓ(X)` for small dense matrices.
//!
//! The argument is scaled to `Y = X / 2^s` with `‖Y‖₁ < 1`. At that scale
//! every `φ_j`, `j ≥ 1`, is the Lobatto quadrature of its integral
//! representation
//!
//! ```text
//! φ_j(Y) ≈ Σ_i w_i e^{(1-θ_i) Y} θ_i^{j-1} / (j-1)!
//! ```
//!
//! using one shared set of exponentials (the node `θ = 1` contributes the
//! identity and the node `θ = 0` contributes `e^Y = φ_0(Y)`). The table is then
//! brought back to scale 1 with `s` applications of the doubling relation
//!
//! ```text
//! φ_ℓ(2z) = 2^{-ℓ} [ e^z φ_ℓ(z) + Σ_{k=1}^{ℓ} φ_k(z) / (ℓ-k)! ]
//! ```

use super::expm::expm;
use super::gll::GllRule;
use crate::error::{Error, Result};
use crate::matrix::{gemm_into, Matrix};
use crate::scalar::Scalar;

/// `φ_0(X), …, φ_{ell_max}(X)` for one matrix `X`.
#[derive(Clone, Debug)]
pub struct PhiTable<T: Scalar = f64> {
    base: Matrix<T>,
    phis: Vec<Matrix<T>>,
    scaling: u32,
}

impl<T: Scalar> PhiTable<T> {
    /// Assembles a table from precomputed values; `phis[k]` must be `φ_k(base)`.
    pub fn from_parts(base: Matrix<T>, phis: Vec<Matrix<T>>) -> Result<Self> {
        if phis.is_empty() {
            return Err(Error::Validation("a φ table needs at least φ_0".into()));
        }
        for p in &phis {
            base.check_same_shape(p)?;
        }
        Ok(Self {
            base,
            phis,
            scaling: 0,
        })
    }

    /// The argument `X`.
    pub fn base(&self) -> &Matrix<T> {
        &self.base
    }

    pub fn ell_max(&self) -> usize {
        self.phis.len() - 1
    }

    /// `φ_k(X)`.
    pub fn phi(&self, k: usize) -> &Matrix<T> {
        &self.phis[k]
    }

    pub fn phis(&self) -> &[Matrix<T>] {
        &self.phis
    }

    pub fn into_phis(self) -> Vec<Matrix<T>> {
        self.phis
    }

    /// Number of doublings that produced this table.
    pub fn scaling(&self) -> u32 {
        self.scaling
    }

    /// Largest defect of `φ_k(X) = X φ_{k+1}(X) + I/k!` over the table.
    ///
    /// Each defect is relative to `‖X φ_{k+1}‖_F + ‖I/k!‖_F`, the size of the
    /// summands; `φ_k` itself can be far smaller when they cancel.
    pub fn recurrence_defect(&self) -> f64 {
        let n = self.base.rows();
        let mut worst: f64 = 0.0;
        for k in 0..self.ell_max() {
            let mut rhs = self.base.matmul(&self.phis[k + 1]).expect("square");
            let scale = rhs.norm_fro() + (n as f64).sqrt() / factorial(k);
            rhs.add_identity(T::from_real(1.0 / factorial(k)));
            let diff = rhs.sub(&self.phis[k]).expect("same shape").norm_fro();
            worst = worst.max(diff / scale);
        }
        worst
    }
}

/// Smallest `s ≥ 0` with `‖X‖₁ / 2^s < 1`.
pub fn scaling_exponent<T: Scalar>(x: &Matrix<T>) -> u32 {
    let norm = x.norm1();
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) >= 1.0 {
        s += 1;
    }
    s
}

/// `φ_0(X), …, φ_{ell_max}(X)` by Lobatto quadrature and doubling.
///
/// With `ell_max = 0` this is [`expm`].
pub fn phiquad<T: Scalar>(x: &Matrix<T>, ell_max: usize, rule: &GllRule) -> Result<PhiTable<T>> {
    phiquad_scaled(x, ell_max, rule, scaling_exponent(x))
}

/// [`phiquad`] with an explicit scaling exponent `s`.
///
/// The quadrature is only accurate when `‖X‖₁ / 2^s < 1`; larger `s` than the
/// minimum is allowed and must give the same table up to roundoff.
pub fn phiquad_scaled<T: Scalar>(
    x: &Matrix<T>,
    ell_max: usize,
    rule: &GllRule,
    s: u32,
) -> Result<PhiTable<T>> {
    if !x.is_square() {
        return Err(Error::dim(format!(
            "φ-functions need a square matrix, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    if !x.is_finite() {
        return Err(Error::Validation(
            "φ-function input has non-finite entries".into(),
        ));
    }
    if ell_max == 0 {
        return Ok(PhiTable {
            base: x.clone(),
            phis: vec![expm(x)?],
            scaling: 0,
        });
    }
    let n = x.rows();
    let y = x.scaled(T::from_real(0.5f64.powi(s as i32)));
    let nodes = rule.nodes();
    let weights = rule.weights();
    let q = nodes.len();

    let mut phis: Vec<Matrix<T>> = (0..=ell_max).map(|_| Matrix::zeros(n, n)).collect();
    // Node θ_q = 1: e^0 = I.
    for (j, phi) in phis.iter_mut().enumerate().skip(1) {
        phi.add_identity(T::from_real(weights[q - 1] / factorial(j - 1)));
    }
    for i in 0..q - 1 {
        let e = expm(&y.scaled(T::from_real(1.0 - nodes[i])))?;
        for (j, phi) in phis.iter_mut().enumerate().skip(1) {
            let c = weights[i] * nodes[i].powi(j as i32 - 1) / factorial(j - 1);
            if c != 0.0 {
                phi.axpy(T::from_real(c), &e)?;
            }
        }
        if i == 0 {
            // θ_1 = 0 gives e^Y itself.
            phis[0] = e;
        }
    }

    let mut table = PhiTable {
        base: y,
        phis,
        scaling: 0,
    };
    for _ in 0..s {
        table = phi_square_step(&table)?;
    }
    table.base = x.clone();
    table.scaling = s;
    Ok(table)
}

/// Maps a table at argument `z` to the table at `2z`.
///
/// Every new entry is formed from the old table only.
pub fn phi_square_step<T: Scalar>(table: &PhiTable<T>) -> Result<PhiTable<T>> {
    let old = &table.phis;
    let e = &old[0];
    let mut new = Vec::with_capacity(old.len());
    new.push(e.matmul(e)?);
    for l in 1..old.len() {
        let mut acc = Matrix::zeros(e.rows(), e.cols());
        for (k, phi_k) in old.iter().enumerate().take(l + 1).skip(1) {
            acc.axpy(T::from_real(1.0 / factorial(l - k)), phi_k)?;
        }
        gemm_into(T::one(), e, &old[l], T::one(), &mut acc);
        acc.scale_mut(T::from_real(0.5f64.powi(l as i32)));
        new.push(acc);
    }
    Ok(PhiTable {
        base: table.base.scaled(T::from_real(2.0)),
        phis: new,
        scaling: table.scaling + 1,
    })
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}
