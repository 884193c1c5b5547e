//! Quick invariant checks against the brute-force oracles.
//!
//! The options deliberately allow breaking the implementation (a wrong
//! splitting prefactor, a too-coarse quadrature rule) so that the checks can
//! be seen to fail.

use std::fmt;

use crate::error::Result;
use crate::integrators::{integrate, Backend, Method, StepperConfig};
use crate::matfun::{expm, factorial, phiquad, GllRule, DEFAULT_GLL_NODES};
use crate::matrix::{kron, Matrix};
use crate::oracle::{assemble_kronsum, expm_taylor, phi_taylor_action, phi_taylor_matrix};
use crate::problems::build_adr;
use crate::split::{build_split_phi_with, SplitPhi};
use crate::tensor::{kronsum_action, tucker, KroneckerSum, Tensor};
use crate::testing::{
    random_matrix, random_matrix_with_norm, random_stable_matrix, random_tensor, rng, TestRng,
};

/// Least-squares slope of `log(error)` against `log(τ)`.
pub fn fit_order(taus: &[f64], errors: &[f64]) -> f64 {
    let n = taus.len() as f64;
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Step sizes `2^-3, …, 2^-9`.
pub fn splitting_taus() -> Vec<f64> {
    (3..=9).map(|k| 0.5f64.powi(k)).collect()
}

/// Relative error of the split `φ_ℓ(τK) V` against the Taylor oracle for
/// each `τ`.
///
/// `prefactor` replaces `(ℓ!)^{d-1}` when given.
pub fn splitting_errors(
    k: &KroneckerSum,
    v: &Tensor,
    ell: usize,
    taus: &[f64],
    rule: &GllRule,
    prefactor: Option<f64>,
) -> Result<Vec<f64>> {
    taus.iter()
        .map(|&tau| {
            let mut sp = build_split_phi_with(k, tau, ell, rule)?;
            if let Some(p) = prefactor {
                sp = SplitPhi::from_parts(ell, tau, sp.factors().to_vec(), p)?;
            }
            let got = sp.apply(v)?;
            let dense = assemble_kronsum(&k.scaled(tau))?;
            let want = Tensor::unvec(phi_taylor_action(dense.matrix(), ell, v.vec())?, v.dims())?;
            Ok(got.rel_diff_fro(&want))
        })
        .collect()
}

/// Random stable Kronecker sum with factor sizes `dims`.
pub fn random_stable_kronsum(r: &mut TestRng, dims: &[usize]) -> KroneckerSum {
    KroneckerSum::new(
        dims.iter()
            .map(|&n| random_stable_matrix(r, n, 0.5))
            .collect(),
    )
    .expect("square factors")
}

/// Deliberate faults for demonstrating that the checks can fail.
#[derive(Clone, Debug)]
pub struct SelftestOptions {
    /// Use `(ℓ!)^d` instead of `(ℓ!)^{d-1}` in the splitting.
    pub wrong_prefactor: bool,
    /// Lobatto node count for φ-function quadrature.
    pub gll_nodes: usize,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            wrong_prefactor: false,
            gll_nodes: DEFAULT_GLL_NODES,
            seed: 2024,
        }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, value: f64, tol: f64, what: &str) -> Check {
    Check {
        name,
        passed: value <= tol,
        detail: format!("{what} {value:.3e} (tolerance {tol:.0e})"),
    }
}

/// Runs every check and returns their outcomes in order.
pub fn selftest(opts: &SelftestOptions) -> Result<Vec<Check>> {
    let rule = GllRule::new(opts.gll_nodes)?;
    let mut r = rng(opts.seed);
    let mut out = Vec::new();

    // Tensor kernels against explicit Kronecker products.
    let mut worst: f64 = 0.0;
    for dims in [vec![7], vec![3, 5], vec![2, 3, 4], vec![4, 1, 3, 2]] {
        let t = random_tensor(&mut r, &dims);
        let ms: Vec<Matrix> = dims.iter().map(|&n| random_matrix(&mut r, n, n)).collect();
        let got = tucker(&t, &ms)?;
        let big = ms
            .iter()
            .rev()
            .skip(1)
            .fold(ms[ms.len() - 1].clone(), |acc, m| kron(&acc, m));
        let want = Tensor::unvec(big.matvec(t.vec())?, &dims)?;
        worst = worst.max(got.rel_diff_fro(&want));
        let k = KroneckerSum::new(ms)?;
        let got = kronsum_action(&t, &k)?;
        let want = assemble_kronsum(&k)?.apply(&t)?;
        worst = worst.max(got.rel_diff_fro(&want));
    }
    out.push(check(
        "tensor kernels",
        worst,
        1e-13,
        "max relative difference",
    ));

    // Quadrature exactness on monomials.
    let q = rule.len();
    let mut worst: f64 = 0.0;
    for deg in 0..=(2 * q - 3) {
        let exact = 1.0 / (deg as f64 + 1.0);
        let got = rule.integrate(|t| t.powi(deg as i32));
        worst = worst.max(((got - exact) / exact).abs());
    }
    out.push(check(
        "lobatto exactness",
        worst,
        1e-13,
        "max relative error",
    ));

    // expm against the Taylor oracle.
    let mut worst: f64 = 0.0;
    for n in [3, 8, 15] {
        let x = random_matrix_with_norm(&mut r, n, 5.0);
        worst = worst.max(expm(&x)?.rel_diff(&expm_taylor(&x)?));
    }
    out.push(check("expm", worst, 1e-12, "max relative error"));

    // phiquad against the Taylor oracle, plus the recurrence.
    let (mut worst, mut defect): (f64, f64) = (0.0, 0.0);
    for (n, norm) in [(4, 0.5), (10, 20.0), (12, 50.0)] {
        let x = random_matrix_with_norm(&mut r, n, norm);
        let table = phiquad(&x, 3, &rule)?;
        for ell in 0..=3 {
            worst = worst.max(table.phi(ell).rel_diff(&phi_taylor_matrix(&x, ell)?));
        }
        defect = defect.max(table.recurrence_defect());
    }
    out.push(check(
        "phiquad accuracy",
        worst,
        1e-11,
        "max relative error",
    ));
    out.push(check(
        "phi recurrence",
        defect,
        1e-11,
        "max relative defect",
    ));

    // Exact splitting of the exponential.
    let k = random_stable_kronsum(&mut r, &[3, 4, 5]);
    let v = random_tensor(&mut r, &[3, 4, 5]);
    let exp_err = splitting_errors(&k, &v, 0, &[0.3], &rule, None)?[0];
    out.push(check(
        "exponential splitting",
        exp_err,
        1e-12,
        "relative error",
    ));

    // Second-order splitting for ℓ = 1, 2.
    let taus = splitting_taus();
    for (ell, dims) in [(1, vec![4, 5]), (2, vec![3, 4, 5])] {
        let k = random_stable_kronsum(&mut r, &dims);
        let v = random_tensor(&mut r, &dims);
        let pre = opts
            .wrong_prefactor
            .then(|| factorial(ell).powi(dims.len() as i32));
        let errs = splitting_errors(&k, &v, ell, &taus, &rule, pre)?;
        let order = fit_order(&taus, &errs);
        out.push(Check {
            name: if ell == 1 {
                "splitting order l=1"
            } else {
                "splitting order l=2"
            },
            passed: (order - 2.0).abs() <= 0.1,
            detail: format!("fitted order {order:.3} (expected 2.0 ± 0.1)"),
        });
    }

    // Lawson methods do not depend on the backend.
    let spec = build_adr(3, 4, 5)?.to_problem_spec();
    let a = integrate(
        &spec,
        &StepperConfig::new(Method::Lawson2b, 8).rule(rule.clone()),
    )?;
    let b = integrate(
        &spec,
        &StepperConfig::new(Method::Lawson2b, 8)
            .backend(Backend::DenseOracle)
            .rule(rule.clone()),
    )?;
    out.push(check(
        "lawson backend agreement",
        a.final_state.rel_diff_fro(&b.final_state),
        1e-12,
        "relative difference",
    ));
    Ok(out)
}
