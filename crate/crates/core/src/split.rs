//! Direction splitting of φ-functions of Kronecker sums.
//!
//! For `K = A_d ⊕ … ⊕ A_1` and `ℓ ≥ 1`,
//!
//! ```text
//! φ_ℓ(τK) = (ℓ!)^{d-1} (φ_ℓ(τA_d) ⊗ … ⊗ φ_ℓ(τA_1)) + O(τ²),
//! ```
//!
//! so `φ_ℓ(τK) v` is approximated by a single Tucker operator with the small
//! factors `φ_ℓ(τA_μ)` applied to `(ℓ!)^{d-1} V`. Both sides expand to
//! `I/ℓ! + τK/(ℓ+1)!` at first order, which is why the splitting is harmless
//! inside integrators of order at most two. For `ℓ = 0` the identity
//! `e^{τK} = e^{τA_d} ⊗ … ⊗ e^{τA_1}` is exact.

use crate::error::{Error, Result};
use crate::matfun::{expm, factorial, phiquad, GllRule};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tensor::{tucker, KroneckerSum, Tensor};

/// Per-direction factors `φ_ℓ(τA_μ)` and the prefactor `(ℓ!)^{d-1}`.
#[derive(Clone, Debug)]
pub struct SplitPhi<T: Scalar = f64> {
    ell: usize,
    tau: f64,
    factors: Vec<Matrix<T>>,
    prefactor: f64,
}

impl<T: Scalar> SplitPhi<T> {
    /// Builds from explicit parts. The prefactor is taken as given, which lets
    /// callers test what happens when it is wrong.
    pub fn from_parts(
        ell: usize,
        tau: f64,
        factors: Vec<Matrix<T>>,
        prefactor: f64,
    ) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Validation(
                "split φ needs at least one factor".into(),
            ));
        }
        for (mu, f) in factors.iter().enumerate() {
            if !f.is_square() {
                return Err(Error::dim_mode(mu, "split φ factor must be square"));
            }
        }
        Ok(Self {
            ell,
            tau,
            factors,
            prefactor,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn factors(&self) -> &[Matrix<T>] {
        &self.factors
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    /// `((ℓ!)^{d-1} V) ×_1 φ_ℓ(τA_1) ×_2 … ×_d φ_ℓ(τA_d)`.
    pub fn apply(&self, v: &Tensor<T>) -> Result<Tensor<T>> {
        apply_split_phi(self, v)
    }
}

/// `(ℓ!)^{d-1}`.
pub fn split_prefactor(ell: usize, d: usize) -> f64 {
    factorial(ell).powi(d as i32 - 1)
}

/// Split approximation of `φ_ℓ(τK)` using the default Lobatto rule.
pub fn build_split_phi<T: Scalar>(
    k: &KroneckerSum<T>,
    tau: f64,
    ell: usize,
) -> Result<SplitPhi<T>> {
    build_split_phi_with(k, tau, ell, &GllRule::default())
}

pub fn build_split_phi_with<T: Scalar>(
    k: &KroneckerSum<T>,
    tau: f64,
    ell: usize,
    rule: &GllRule,
) -> Result<SplitPhi<T>> {
    let mut all = build_split_phis_with(k, tau, ell, rule)?;
    Ok(all.pop().expect("ell_max + 1 entries"))
}

/// Split approximations of `φ_0(τK), …, φ_{ell_max}(τK)` sharing one φ-table
/// per direction.
///
/// Directions with identical factor matrices share a single evaluation.
pub fn build_split_phis_with<T: Scalar>(
    k: &KroneckerSum<T>,
    tau: f64,
    ell_max: usize,
    rule: &GllRule,
) -> Result<Vec<SplitPhi<T>>> {
    let d = k.order();
    let mut tables: Vec<Vec<Matrix<T>>> = Vec::with_capacity(d);
    for (mu, a) in k.factors().iter().enumerate() {
        if let Some(prev) = k.factors()[..mu].iter().position(|b| b == a) {
            let shared = tables[prev].clone();
            tables.push(shared);
            continue;
        }
        let scaled = a.scaled(T::from_real(tau));
        let phis = if ell_max == 0 {
            vec![expm(&scaled)?]
        } else {
            phiquad(&scaled, ell_max, rule)?.into_phis()
        };
        tables.push(phis);
    }
    Ok((0..=ell_max)
        .map(|ell| SplitPhi {
            ell,
            tau,
            factors: tables.iter().map(|t| t[ell].clone()).collect(),
            prefactor: split_prefactor(ell, d),
        })
        .collect())
}

/// `(prefactor · V) ×_1 F_1 ×_2 … ×_d F_d`.
pub fn apply_split_phi<T: Scalar>(sp: &SplitPhi<T>, v: &Tensor<T>) -> Result<Tensor<T>> {
    if sp.prefactor == 1.0 {
        tucker(v, &sp.factors)
    } else {
        tucker(&v.scaled(T::from_real(sp.prefactor)), &sp.factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{assemble_kronsum, phi_at_zero};
    use crate::testing::{random_stable_matrix, random_tensor, rng};

    #[test]
    fn prefactors() {
        let mut r = rng(51);
        let k = KroneckerSum::new(vec![
            random_stable_matrix(&mut r, 2, 0.5),
            random_stable_matrix(&mut r, 3, 0.5),
            random_stable_matrix(&mut r, 2, 0.5),
        ])
        .unwrap();
        assert_eq!(build_split_phi(&k, 0.1, 0).unwrap().prefactor(), 1.0);
        assert_eq!(build_split_phi(&k, 0.1, 1).unwrap().prefactor(), 1.0);
        assert_eq!(build_split_phi(&k, 0.1, 2).unwrap().prefactor(), 4.0);
        assert_eq!(split_prefactor(3, 3), 36.0);
    }

    #[test]
    fn zero_step_gives_scaled_identities() {
        let mut r = rng(52);
        let k = KroneckerSum::new(vec![
            random_stable_matrix(&mut r, 3, 0.5),
            random_stable_matrix(&mut r, 4, 0.5),
        ])
        .unwrap();
        for ell in 0..3 {
            let sp = build_split_phi(&k, 0.0, ell).unwrap();
            for f in sp.factors() {
                let mut want = Matrix::identity(f.rows());
                want.scale_mut(1.0 / factorial(ell));
                assert!(f.rel_diff(&want) < 1e-15);
            }
            let v = random_tensor(&mut r, &[3, 4]);
            let got = sp.apply(&v).unwrap();
            let want = phi_at_zero(ell, v.vec());
            for (a, b) in got.vec().iter().zip(&want) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_direction_is_exact() {
        let mut r = rng(53);
        let a = random_stable_matrix(&mut r, 6, 0.5);
        let k = KroneckerSum::new(vec![a.clone()]).unwrap();
        let op = assemble_kronsum(&k.scaled(0.3)).unwrap();
        let v = random_tensor(&mut r, &[6]);
        for ell in 0..3 {
            let got = build_split_phi(&k, 0.3, ell).unwrap().apply(&v).unwrap();
            let want = op.phi_action(ell, &v).unwrap();
            assert!(got.rel_diff_fro(&want) < 1e-12);
        }
    }

    #[test]
    fn exponential_is_exact() {
        let mut r = rng(54);
        let k = KroneckerSum::new(vec![
            random_stable_matrix(&mut r, 3, 0.5),
            random_stable_matrix(&mut r, 4, 0.5),
            random_stable_matrix(&mut r, 5, 0.5),
        ])
        .unwrap();
        let tau = 0.2;
        let op = assemble_kronsum(&k.scaled(tau)).unwrap();
        let v = random_tensor(&mut r, &[3, 4, 5]);
        let got = build_split_phi(&k, tau, 0).unwrap().apply(&v).unwrap();
        let want = op.phi_action(0, &v).unwrap();
        assert!(
            got.rel_diff_fro(&want) < 1e-12,
            "{}",
            got.rel_diff_fro(&want)
        );
    }

    #[test]
    fn shared_factors_are_evaluated_once_and_agree() {
        let mut r = rng(55);
        let a = random_stable_matrix(&mut r, 4, 0.5);
        let k = KroneckerSum::new(vec![a.clone(), a.clone()]).unwrap();
        let sp = build_split_phi(&k, 0.1, 1).unwrap();
        assert_eq!(sp.factors()[0], sp.factors()[1]);
    }

    #[test]
    fn identity_direction_reduces_to_single_mode() {
        // A_2 = 0: ℓ! · φ_ℓ(τA_1) ⊗ (I/ℓ!) = I ⊗ φ_ℓ(τA_1), which is exact.
        let mut r = rng(56);
        let a = random_stable_matrix(&mut r, 5, 0.5);
        let k = KroneckerSum::new(vec![a.clone(), Matrix::zeros(3, 3)]).unwrap();
        let tau = 0.25;
        let op = assemble_kronsum(&k.scaled(tau)).unwrap();
        let v = random_tensor(&mut r, &[5, 3]);
        for ell in 1..3 {
            let got = build_split_phi(&k, tau, ell).unwrap().apply(&v).unwrap();
            let want = op.phi_action(ell, &v).unwrap();
            assert!(got.rel_diff_fro(&want) < 1e-12);
        }
    }
}
