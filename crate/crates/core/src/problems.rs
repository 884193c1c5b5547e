//! Benchmark problems: a 3D advection–diffusion–reaction equation with a
//! manufactured solution and a 2D linear-quadratic-control Riccati equation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrators::{Nonlinearity, ProblemSpec};
use crate::matrix::{gemm_into, kron, Matrix};
use crate::tensor::{KroneckerSum, Tensor};

/// Tridiagonal centered-difference matrix for `eps ∂xx + alpha ∂x` on the
/// inner points `x_i = i h`, `h = 1/(n+1)`, with homogeneous Dirichlet data.
pub fn fd_operator_1d(n: usize, eps: f64, alpha: f64) -> Result<Matrix> {
    fd_operator_1d_variable(n, eps, |_| alpha)
}

/// As [`fd_operator_1d`] with an advection coefficient sampled at each node.
pub fn fd_operator_1d_variable(n: usize, eps: f64, coeff: impl Fn(f64) -> f64) -> Result<Matrix> {
    if n < 1 {
        return Err(Error::Validation(
            "a 1D grid needs at least one inner point".into(),
        ));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let diff = eps / (h * h);
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        let adv = coeff((i + 1) as f64 * h) / (2.0 * h);
        a[(i, i)] = -2.0 * diff;
        if i > 0 {
            a[(i, i - 1)] = diff - adv;
        }
        if i + 1 < n {
            a[(i, i + 1)] = diff + adv;
        }
    }
    Ok(a)
}

/// Inner grid points `i/(n+1)`, `i = 1..=n`.
pub fn inner_grid(n: usize) -> Vec<f64> {
    let h = 1.0 / (n as f64 + 1.0);
    (1..=n).map(|i| i as f64 * h).collect()
}

pub const ADR_EPS: f64 = 0.75;
pub const ADR_ALPHA: f64 = 0.1;
pub const ADR_T_FINAL: f64 = 1.0;

/// `∂_t u = ε Δu + α (∂_1 + ∂_2 + ∂_3) u + 1/(1 + u²) + Ψ` on the unit cube
/// with exact solution `e^t u_0`, `u_0 = 64 Π x_μ (1 - x_μ)`.
#[derive(Clone, Debug)]
pub struct AdrProblem {
    dims: [usize; 3],
    eps: f64,
    alpha: f64,
    factors: Vec<Matrix>,
    grids: Vec<Vec<f64>>,
    u0: Tensor,
    /// `u_0 - L u_0` with `L = ε Δ + α Σ ∂_μ`.
    u0_minus_lu0: Tensor,
    u0_sq: Tensor,
}

pub fn build_adr(n1: usize, n2: usize, n3: usize) -> Result<AdrProblem> {
    AdrProblem::new([n1, n2, n3], ADR_EPS, ADR_ALPHA)
}

impl AdrProblem {
    pub fn new(dims: [usize; 3], eps: f64, alpha: f64) -> Result<Self> {
        let factors = dims
            .iter()
            .map(|&n| fd_operator_1d(n, eps, alpha))
            .collect::<Result<Vec<_>>>()?;
        let grids: Vec<Vec<f64>> = dims.iter().map(|&n| inner_grid(n)).collect();
        let p = |x: f64| x * (1.0 - x);
        let dp = |x: f64| 1.0 - 2.0 * x;
        let u0 = Tensor::from_fn(&dims, |i| {
            64.0 * p(grids[0][i[0]]) * p(grids[1][i[1]]) * p(grids[2][i[2]])
        });
        let u0_minus_lu0 = Tensor::from_fn(&dims, |i| {
            let x = [grids[0][i[0]], grids[1][i[1]], grids[2][i[2]]];
            let pv = x.map(p);
            let dv = x.map(dp);
            let lap = -2.0 * (pv[1] * pv[2] + pv[0] * pv[2] + pv[0] * pv[1]);
            let grad = dv[0] * pv[1] * pv[2] + pv[0] * dv[1] * pv[2] + pv[0] * pv[1] * dv[2];
            64.0 * (pv[0] * pv[1] * pv[2] - eps * lap - alpha * grad)
        });
        let u0_sq = u0.map(|v| v * v);
        Ok(Self {
            dims,
            eps,
            alpha,
            factors,
            grids,
            u0,
            u0_minus_lu0,
            u0_sq,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn grid(&self, mu: usize) -> &[f64] {
        &self.grids[mu]
    }

    pub fn operator(&self) -> KroneckerSum {
        KroneckerSum::new(self.factors.clone()).expect("square factors")
    }

    pub fn initial(&self) -> &Tensor {
        &self.u0
    }

    /// `e^t u_0` at the grid points.
    pub fn exact(&self, t: f64) -> Tensor {
        self.u0.scaled(t.exp())
    }

    /// `Ψ(t, ·)` at the grid points.
    pub fn source(&self, t: f64) -> Tensor {
        let et = t.exp();
        let e2t = et * et;
        let mut out = self.u0_minus_lu0.scaled(et);
        for (o, &s) in out.vec_mut().iter_mut().zip(self.u0_sq.vec()) {
            *o -= 1.0 / (1.0 + e2t * s);
        }
        out
    }

    /// `1/(1 + U²) + Ψ(t, ·)` elementwise.
    pub fn nonlinearity(&self, t: f64, u: &Tensor) -> Result<Tensor> {
        adr_g(&self.u0_minus_lu0, &self.u0_sq, t, u)
    }

    /// Relative infinity-norm error of `u` against `exact(t)`.
    pub fn error(&self, t: f64, u: &Tensor) -> f64 {
        u.rel_diff_inf(&self.exact(t))
    }

    pub fn to_problem_spec(&self) -> ProblemSpec {
        let w = Arc::new(self.u0_minus_lu0.clone());
        let sq = Arc::new(self.u0_sq.clone());
        let g: Nonlinearity<f64> = Box::new(move |t, u| adr_g(&w, &sq, t, u));
        let u0 = self.u0.clone();
        let exact_u0 = self.u0.clone();
        ProblemSpec::new(self.operator(), g, u0, 0.0, ADR_T_FINAL)
            .expect("consistent by construction")
            .with_exact(Box::new(move |t| exact_u0.scaled(t.exp())))
    }
}

fn adr_g(w: &Tensor, u0_sq: &Tensor, t: f64, u: &Tensor) -> Result<Tensor> {
    if u.dims() != w.dims() {
        return Err(Error::dim(format!(
            "state {:?} does not match the grid {:?}",
            u.dims(),
            w.dims()
        )));
    }
    let et = t.exp();
    let e2t = et * et;
    let data = u
        .vec()
        .iter()
        .zip(w.vec())
        .zip(u0_sq.vec())
        .map(|((&x, &wi), &s)| 1.0 / (1.0 + x * x) + et * wi - 1.0 / (1.0 + e2t * s))
        .collect();
    Tensor::unvec(data, u.dims())
}

pub const RICCATI_ALPHA: f64 = 100.0;
pub const RICCATI_T_FINAL: f64 = 0.025;
/// Relative asymmetry below which the two Jacobian factors are shared.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// `U' = AᵀU + UA + C + UBU`, `U(0) = 0`, with `A` the 2D discretization of
/// `∂xx + ∂yy - 10x ∂x - 100y ∂y`, `B = -bbᵀ` and `C = α cᵀc`.
#[derive(Clone, Debug)]
pub struct RiccatiProblem {
    n_hat: usize,
    a: Matrix,
    a_t: Matrix,
    b: Vec<f64>,
    c: Vec<f64>,
    alpha: f64,
}

pub fn build_riccati(n_hat: usize) -> Result<RiccatiProblem> {
    if n_hat < 2 {
        return Err(Error::Validation(format!(
            "the Riccati grid needs at least 2 inner points per direction, got {n_hat}"
        )));
    }
    let d1 = fd_operator_1d_variable(n_hat, 1.0, |x| -10.0 * x)?;
    let d2 = fd_operator_1d_variable(n_hat, 1.0, |y| -100.0 * y)?;
    let id = Matrix::identity(n_hat);
    let a = kron(&id, &d1).add(&kron(&d2, &id))?;
    let grid = inner_grid(n_hat);
    let indicator = |lo: f64, hi: f64| -> Vec<f64> {
        (0..n_hat * n_hat)
            .map(|k| {
                let x = grid[k % n_hat];
                if lo < x && x <= hi {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    };
    Ok(RiccatiProblem {
        n_hat,
        a_t: a.transpose(),
        a,
        b: indicator(0.1, 0.3),
        c: indicator(0.7, 0.9),
        alpha: RICCATI_ALPHA,
    })
}

impl RiccatiProblem {
    pub fn n_hat(&self) -> usize {
        self.n_hat
    }

    /// State dimension `n = n̂²`.
    pub fn n(&self) -> usize {
        self.n_hat * self.n_hat
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `-bbᵀ`.
    pub fn b_matrix(&self) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| -self.b[i] * self.b[j])
    }

    /// `α cᵀc`.
    pub fn c_matrix(&self) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| self.alpha * self.c[i] * self.c[j])
    }

    /// `‖C‖_F = α ‖c‖²`.
    pub fn c_norm(&self) -> f64 {
        self.alpha * self.c.iter().map(|x| x * x).sum::<f64>()
    }

    /// Both mode factors are `Aᵀ`: `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec(U) = vec(AᵀU + UA)`.
    pub fn operator(&self) -> KroneckerSum {
        KroneckerSum::new(vec![self.a_t.clone(), self.a_t.clone()]).expect("square")
    }

    /// `C + UBU`, using `UBU = -(Ub)(bᵀU)`.
    pub fn nonlinearity(&self, u: &Matrix) -> Result<Matrix> {
        self.check(u)?;
        let (y, z) = self.u_times_b(u);
        let n = self.n();
        Ok(Matrix::from_fn(n, n, |i, j| {
            self.alpha * self.c[i] * self.c[j] - y[i] * z[j]
        }))
    }

    /// `J_1 = Aᵀ + UB` and `J_2 = (A + BU)ᵀ`.
    ///
    /// When `U` is symmetric to [`SYMMETRY_TOL`] the two coincide and a single
    /// matrix is returned twice.
    pub fn jacobian_factors(&self, u: &Matrix) -> Result<Vec<Matrix>> {
        self.check(u)?;
        let (y, z) = self.u_times_b(u);
        let j1 = self.rank_one_update(&y);
        let asym = relative_asymmetry(u);
        if asym <= SYMMETRY_TOL {
            Ok(vec![j1.clone(), j1])
        } else {
            log::warn!("Riccati state is not symmetric (relative asymmetry {asym:.3e})");
            let j2 = self.rank_one_update(&z);
            Ok(vec![j1, j2])
        }
    }

    /// `AᵀU + UA + C + UBU`.
    pub fn rhs(&self, u: &Matrix) -> Result<Matrix> {
        let mut r = self.nonlinearity(u)?;
        gemm_into(1.0, &self.a_t, u, 1.0, &mut r);
        gemm_into(1.0, u, &self.a, 1.0, &mut r);
        Ok(r)
    }

    /// `‖AᵀU + UA + C + UBU‖_F`.
    pub fn are_residual(&self, u: &Matrix) -> Result<f64> {
        Ok(self.rhs(u)?.norm_fro())
    }

    /// Rounding uncertainty of [`relative_residual`](Self::relative_residual):
    /// `ε (‖AᵀU‖_F + ‖UA‖_F + ‖C‖_F + ‖UBU‖_F) / ‖C‖_F`.
    ///
    /// Differences between residuals below this level carry no information.
    pub fn residual_rounding_level(&self, u: &Matrix) -> Result<f64> {
        self.check(u)?;
        let (y, z) = self.u_times_b(u);
        let ubu = y.iter().map(|v| v * v).sum::<f64>().sqrt()
            * z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let terms =
            self.a_t.matmul(u)?.norm_fro() + u.matmul(&self.a)?.norm_fro() + self.c_norm() + ubu;
        Ok(f64::EPSILON * terms / self.c_norm())
    }

    /// [`are_residual`](Self::are_residual) divided by `‖C‖_F`.
    pub fn relative_residual(&self, u: &Matrix) -> Result<f64> {
        Ok(self.are_residual(u)? / self.c_norm())
    }

    pub fn initial(&self) -> Matrix {
        Matrix::zeros(self.n(), self.n())
    }

    pub fn to_problem_spec(&self, t_final: f64) -> Result<ProblemSpec> {
        let me = Arc::new(self.clone());
        let for_g = Arc::clone(&me);
        let g: Nonlinearity<f64> =
            Box::new(move |_, u| Ok(Tensor::from_matrix(for_g.nonlinearity(&u.to_matrix()?)?)));
        let spec = ProblemSpec::new(
            self.operator(),
            g,
            Tensor::from_matrix(self.initial()),
            0.0,
            t_final,
        )?;
        Ok(spec.with_jacobian(Box::new(move |u| me.jacobian_factors(&u.to_matrix()?))))
    }

    /// `(Ub, Uᵀb)`.
    fn u_times_b(&self, u: &Matrix) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let mut y = vec![0.0; n];
        let mut z = vec![0.0; n];
        for (j, (zj, &bj)) in z.iter_mut().zip(&self.b).enumerate() {
            let col = u.column(j);
            if bj != 0.0 {
                for (yi, &uij) in y.iter_mut().zip(col) {
                    *yi += uij * bj;
                }
            }
            *zj = col.iter().zip(&self.b).map(|(x, b)| x * b).sum();
        }
        (y, z)
    }

    /// `Aᵀ - v bᵀ`.
    fn rank_one_update(&self, v: &[f64]) -> Matrix {
        let mut j = self.a_t.clone();
        for (col, &bj) in self.b.iter().enumerate() {
            if bj != 0.0 {
                for (row, &vi) in v.iter().enumerate() {
                    j[(row, col)] -= vi * bj;
                }
            }
        }
        j
    }

    fn check(&self, u: &Matrix) -> Result<()> {
        let n = self.n();
        if u.rows() != n || u.cols() != n {
            return Err(Error::dim(format!(
                "Riccati state must be {n}x{n}, got {}x{}",
                u.rows(),
                u.cols()
            )));
        }
        Ok(())
    }
}

/// `‖U - Uᵀ‖_F / ‖U‖_F` (zero for the zero matrix).
pub fn relative_asymmetry(u: &Matrix) -> f64 {
    let norm = u.norm_fro();
    if norm == 0.0 {
        return 0.0;
    }
    u.sub(&u.transpose())
        .map(|d| d.norm_fro() / norm)
        .unwrap_or(f64::INFINITY)
}

/// `AᵀU + UA + C + UBU`.
pub fn riccati_rhs(u: &Matrix, p: &RiccatiProblem) -> Result<Matrix> {
    p.rhs(u)
}

pub fn riccati_jacobian_factors(u: &Matrix, p: &RiccatiProblem) -> Result<Vec<Matrix>> {
    p.jacobian_factors(u)
}

pub fn are_residual(u: &Matrix, p: &RiccatiProblem) -> Result<f64> {
    p.are_residual(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::assemble_kronsum;
    use crate::testing::{random_matrix, rng};

    #[test]
    fn fd_stencils() {
        let a = fd_operator_1d(3, 1.0, 0.0).unwrap();
        let want = Matrix::from_rows(&[
            &[-32.0, 16.0, 0.0],
            &[16.0, -32.0, 16.0],
            &[0.0, 16.0, -32.0],
        ])
        .unwrap();
        assert_eq!(a, want);
        let b = fd_operator_1d(3, 0.0, 0.1).unwrap();
        for i in 0..3 {
            assert_eq!(b[(i, i)], 0.0);
        }
        assert!((b[(0, 1)] - 0.2).abs() < 1e-15);
        assert!((b[(1, 0)] + 0.2).abs() < 1e-15);
        assert!(fd_operator_1d(0, 1.0, 0.0).is_err());
    }

    #[test]
    fn fd_exact_on_quadratic() {
        let (eps, alpha, n) = (0.75, 0.1, 9);
        let a = fd_operator_1d(n, eps, alpha).unwrap();
        let x = inner_grid(n);
        let f: Vec<f64> = x.iter().map(|x| x * (1.0 - x)).collect();
        let af = a.matvec(&f).unwrap();
        for (xi, v) in x.iter().zip(af) {
            assert!((v - (-2.0 * eps + alpha * (1.0 - 2.0 * xi))).abs() < 1e-12);
        }
    }

    #[test]
    fn fd_second_order_on_sine() {
        let (eps, alpha) = (0.75, 0.1);
        let pi = std::f64::consts::PI;
        let err = |n: usize| {
            let a = fd_operator_1d(n, eps, alpha).unwrap();
            let x = inner_grid(n);
            let f: Vec<f64> = x.iter().map(|x| (pi * x).sin()).collect();
            let af = a.matvec(&f).unwrap();
            x.iter()
                .zip(af)
                .map(|(x, v)| {
                    let exact = -eps * pi * pi * (pi * x).sin() + alpha * pi * (pi * x).cos();
                    (v - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(31), err(63));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "{order}");
    }

    #[test]
    fn adr_exact_values() {
        let p = build_adr(3, 5, 7).unwrap();
        // Centers: x = 0.5 at index 1, 2, 3.
        assert!((p.exact(0.0).get(&[1, 2, 3]) - 1.0).abs() < 1e-15);
        assert_eq!(p.exact(0.0), *p.initial());
        assert!((p.exact(1.0).get(&[1, 2, 3]) - std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn adr_semidiscrete_residual_vanishes() {
        let p = build_adr(6, 7, 8).unwrap();
        let k = p.operator();
        for t in [0.0, 0.5, 1.0] {
            let u = p.exact(t);
            let mut r = k.apply(&u).unwrap();
            r.axpy(1.0, &p.nonlinearity(t, &u).unwrap()).unwrap();
            // d/dt e^t u0 = e^t u0.
            assert!(
                r.rel_diff_inf(&u) < 1e-12,
                "t = {t}: {}",
                r.rel_diff_inf(&u)
            );
        }
    }

    #[test]
    fn adr_source_definition() {
        let p = build_adr(4, 4, 4).unwrap();
        let g = p.nonlinearity(0.0, p.initial()).unwrap();
        let psi = p.source(0.0);
        for ((gv, pv), u) in g.vec().iter().zip(psi.vec()).zip(p.initial().vec()) {
            assert!((gv - (1.0 / (1.0 + u * u) + pv)).abs() < 1e-14);
        }
    }

    #[test]
    fn riccati_indicators() {
        let p = build_riccati(20).unwrap();
        for j in 0..20 {
            for i in 0..20 {
                let k = i + j * 20;
                // x_i = (i+1)/21; 0.1 < x ≤ 0.3 picks 1-based i ∈ {3,4,5,6}.
                let want_b = if (2..=5).contains(&i) { 1.0 } else { 0.0 };
                assert_eq!(p.b()[k], want_b, "k = {k}");
            }
        }
        let c = p.c_matrix();
        let nnz = p.c().iter().filter(|&&v| v != 0.0).count() as f64;
        assert!((c.trace() - 100.0 * nnz).abs() < 1e-9);
        assert!((c.norm_fro() - p.c_norm()).abs() < 1e-9);
    }

    #[test]
    fn riccati_rhs_at_zero_is_c() {
        let p = build_riccati(4).unwrap();
        let r = p.rhs(&p.initial()).unwrap();
        assert_eq!(r, p.c_matrix());
        assert!((p.are_residual(&p.initial()).unwrap() - p.c_norm()).abs() < 1e-12);
    }

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut r = rng(seed);
        let m = random_matrix(&mut r, n, n);
        m.add(&m.transpose()).unwrap().scaled(0.5)
    }

    #[test]
    fn riccati_rhs_matches_vectorized_form() {
        let p = build_riccati(3).unwrap();
        let u = random_symmetric(9, 71);
        let dense = assemble_kronsum(&p.operator()).unwrap();
        let mut want = dense.apply(&Tensor::from_matrix(u.clone())).unwrap();
        let b = p.b_matrix();
        let ubu = u.matmul(&b).unwrap().matmul(&u).unwrap();
        want.axpy(1.0, &Tensor::from_matrix(p.c_matrix().add(&ubu).unwrap()))
            .unwrap();
        let got = Tensor::from_matrix(p.rhs(&u).unwrap());
        assert!(got.rel_diff_fro(&want) < 1e-14);
    }

    #[test]
    fn riccati_jacobian_matches_dense_linearization() {
        let p = build_riccati(3).unwrap();
        let u = random_symmetric(9, 72);
        let js = p.jacobian_factors(&u).unwrap();
        assert_eq!(js[0], js[1]);
        let b = p.b_matrix();
        let id = Matrix::identity(9);
        let j1 = p.a().transpose().add(&u.matmul(&b).unwrap()).unwrap();
        let j2 = p.a().add(&b.matmul(&u).unwrap()).unwrap().transpose();
        let want = kron(&id, &j1).add(&kron(&j2, &id)).unwrap();
        let got = assemble_kronsum(&KroneckerSum::new(js).unwrap()).unwrap();
        assert!(got.matrix().rel_diff(&want) < 1e-14);

        let zero = p.jacobian_factors(&p.initial()).unwrap();
        assert_eq!(zero[0], p.a().transpose());
    }

    #[test]
    fn asymmetric_state_gets_separate_factors() {
        let p = build_riccati(3).unwrap();
        let mut r = rng(73);
        let u = random_matrix(&mut r, 9, 9);
        let js = p.jacobian_factors(&u).unwrap();
        let b = p.b_matrix();
        let j2 = p.a().add(&b.matmul(&u).unwrap()).unwrap().transpose();
        assert!(js[1].rel_diff(&j2) < 1e-14);
        assert!(js[0] != js[1]);
    }

    #[test]
    fn residual_transpose_invariant() {
        let p = build_riccati(3).unwrap();
        let u = random_symmetric(9, 74);
        let a = p.are_residual(&u).unwrap();
        let b = p.are_residual(&u.transpose()).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn rounding_level_scales_with_terms() {
        let p = build_riccati(4).unwrap();
        let zero = p.initial();
        assert!((p.residual_rounding_level(&zero).unwrap() - f64::EPSILON).abs() < 1e-30);
        let u = Matrix::identity(p.n());
        let level = p.residual_rounding_level(&u).unwrap();
        let at = p.a().transpose().norm_fro() + p.a().norm_fro();
        assert!(level > f64::EPSILON * at / p.c_norm());
    }
}
