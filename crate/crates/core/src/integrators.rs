//! Constant-step exponential integrators for `U' = K U + g(t, U)` with `K` a
//! Kronecker sum.
//!
//! Every φ-function action goes through a [`Propagator`], which is either the
//! split Tucker form (small per-direction factors) or a dense reference built
//! by the [`oracle`](crate::oracle) module. The step formulas are shared, so
//! comparing the two backends isolates the splitting error.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::matfun::GllRule;
use crate::matrix::Matrix;
use crate::oracle::{assemble_kronsum, phi_taylor_matrix, DenseOperator};
use crate::scalar::Scalar;
use crate::split::{apply_split_phi, build_split_phis_with, SplitPhi};
use crate::tensor::{KroneckerSum, Tensor};

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    LawsonEuler,
    Lawson2b,
    /// Exponential Euler in the form `U + τ φ_1(τK)(KU + G)`.
    ExpEuler,
    /// Exponential Euler in the form `e^{τK} U + τ φ_1(τK) G`.
    ExpEulerLinearSplit,
    Etd2rk,
    RosenbrockEuler,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::LawsonEuler,
        Method::Lawson2b,
        Method::ExpEuler,
        Method::ExpEulerLinearSplit,
        Method::Etd2rk,
        Method::RosenbrockEuler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::LawsonEuler => "lawson-euler",
            Method::Lawson2b => "lawson2b",
            Method::ExpEuler => "exp-euler",
            Method::ExpEulerLinearSplit => "exp-euler-linear",
            Method::Etd2rk => "etd2rk",
            Method::RosenbrockEuler => "rosenbrock-euler",
        }
    }

    /// Classical order of convergence.
    pub fn order(self) -> u32 {
        match self {
            Method::LawsonEuler | Method::ExpEuler | Method::ExpEulerLinearSplit => 1,
            Method::Lawson2b | Method::Etd2rk | Method::RosenbrockEuler => 2,
        }
    }

    /// φ indices whose actions the method needs for a fixed operator.
    fn phi_indices(self) -> &'static [usize] {
        match self {
            Method::LawsonEuler | Method::Lawson2b => &[0],
            Method::ExpEuler => &[1],
            Method::ExpEulerLinearSplit => &[0, 1],
            Method::Etd2rk => &[1, 2],
            Method::RosenbrockEuler => &[],
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "lawson-euler" | "lawsoneuler" | "lawson1" => Method::LawsonEuler,
            "lawson2b" | "lawson2" => Method::Lawson2b,
            "exp-euler" | "expeuler" => Method::ExpEuler,
            "exp-euler-linear" | "expeulerlinearsplit" | "exp-euler-linear-split" => {
                Method::ExpEulerLinearSplit
            }
            "etd2rk" => Method::Etd2rk,
            "rosenbrock-euler" | "rosenbrockeuler" | "rosenbrock" | "exprosenbrock" => {
                Method::RosenbrockEuler
            }
            _ => return Err(Error::Configuration(format!("unknown method '{s}'"))),
        })
    }
}

/// How φ-function actions are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Direction splitting with small per-direction factors.
    #[default]
    Split,
    /// Dense assembly of `K` and Taylor-series φ-functions.
    DenseOracle,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Split => "split",
            Backend::DenseOracle => "oracle",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "split" => Ok(Backend::Split),
            "oracle" | "dense" | "dense-oracle" => Ok(Backend::DenseOracle),
            _ => Err(Error::Configuration(format!("unknown backend '{s}'"))),
        }
    }
}

/// Nonlinearity `g(t, U)`.
pub type Nonlinearity<T> = Box<dyn Fn(f64, &Tensor<T>) -> Result<Tensor<T>> + Send + Sync>;
/// Exact solution `t ↦ U(t)`.
pub type ExactSolution<T> = Box<dyn Fn(f64) -> Tensor<T> + Send + Sync>;
/// Per-direction Jacobian factors `U ↦ [J_1(U), …, J_d(U)]`.
pub type JacobianFactors<T> = Box<dyn Fn(&Tensor<T>) -> Result<Vec<Matrix<T>>> + Send + Sync>;

/// An initial value problem `U' = K U + g(t, U)`, `U(t0) = U0`, on `[t0, T]`.
pub struct ProblemSpec<T: Scalar = f64> {
    k: KroneckerSum<T>,
    g: Nonlinearity<T>,
    u0: Tensor<T>,
    t0: f64,
    t_final: f64,
    exact: Option<ExactSolution<T>>,
    jacobian: Option<JacobianFactors<T>>,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(
        k: KroneckerSum<T>,
        g: Nonlinearity<T>,
        u0: Tensor<T>,
        t0: f64,
        t_final: f64,
    ) -> Result<Self> {
        if u0.dims() != k.dims().as_slice() {
            return Err(Error::dim(format!(
                "initial tensor {:?} does not match operator {:?}",
                u0.dims(),
                k.dims()
            )));
        }
        if !t0.is_finite() || !t_final.is_finite() || t_final <= t0 {
            return Err(Error::Validation(format!(
                "time interval [{t0}, {t_final}] is empty or not finite"
            )));
        }
        Ok(Self {
            k,
            g,
            u0,
            t0,
            t_final,
            exact: None,
            jacobian: None,
        })
    }

    pub fn with_exact(mut self, exact: ExactSolution<T>) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn with_jacobian(mut self, jacobian: JacobianFactors<T>) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    pub fn operator(&self) -> &KroneckerSum<T> {
        &self.k
    }

    pub fn initial(&self) -> &Tensor<T> {
        &self.u0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self, t: f64) -> Option<Tensor<T>> {
        self.exact.as_ref().map(|f| f(t))
    }

    /// `g(t, U)` with a shape check on the result.
    pub fn nonlinearity(&self, t: f64, u: &Tensor<T>) -> Result<Tensor<T>> {
        let out = (self.g)(t, u)?;
        if out.dims() != u.dims() {
            return Err(Error::dim(format!(
                "nonlinearity returned {:?} for a state of shape {:?}",
                out.dims(),
                u.dims()
            )));
        }
        Ok(out)
    }

    /// `K U + g(t, U)`.
    pub fn rhs(&self, t: f64, u: &Tensor<T>) -> Result<Tensor<T>> {
        let mut f = self.k.apply(u)?;
        f.axpy(T::one(), &self.nonlinearity(t, u)?)?;
        Ok(f)
    }

    pub fn jacobian_factors(&self, u: &Tensor<T>) -> Result<Vec<Matrix<T>>> {
        let jac = self.jacobian.as_ref().ok_or_else(|| {
            Error::Configuration("this method needs Jacobian factors, none were given".into())
        })?;
        let factors = jac(u)?;
        if factors.len() != self.k.order() {
            return Err(Error::dim(format!(
                "expected {} Jacobian factors, got {}",
                self.k.order(),
                factors.len()
            )));
        }
        Ok(factors)
    }
}

impl<T: Scalar> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dims", &self.k.dims())
            .field("t0", &self.t0)
            .field("t_final", &self.t_final)
            .field("exact", &self.exact.is_some())
            .field("jacobian", &self.jacobian.is_some())
            .finish()
    }
}

/// Run parameters.
#[derive(Clone, Debug)]
pub struct StepperConfig {
    pub method: Method,
    pub n_steps: usize,
    pub backend: Backend,
    /// Record every `k`-th state (and the initial one) when set.
    pub sample_every: Option<usize>,
    /// Lobatto rule for the split φ-factors.
    pub rule: GllRule,
}

impl StepperConfig {
    pub fn new(method: Method, n_steps: usize) -> Self {
        Self {
            method,
            n_steps,
            backend: Backend::Split,
            sample_every: None,
            rule: GllRule::default(),
        }
    }

    pub fn backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn sample_every(mut self, k: usize) -> Self {
        self.sample_every = Some(k);
        self
    }

    pub fn rule(mut self, rule: GllRule) -> Self {
        self.rule = rule;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::Validation("n_steps must be positive".into()));
        }
        if self.sample_every == Some(0) {
            return Err(Error::Validation("sample_every must be positive".into()));
        }
        Ok(())
    }
}

/// φ-function actions `v ↦ φ_ℓ(τK) v` for a fixed `τK`.
pub trait PhiAction<T: Scalar> {
    fn phi(&self, ell: usize, v: &Tensor<T>) -> Result<Tensor<T>>;
}

/// Cached φ-actions for one operator and step size.
#[derive(Clone, Debug)]
pub enum Propagator<T: Scalar = f64> {
    Split(Vec<Option<SplitPhi<T>>>),
    /// Dense `φ_ℓ(τK)` matrices indexed by `ℓ`.
    Dense {
        dims: Vec<usize>,
        phis: Vec<Option<Matrix<T>>>,
    },
}

impl<T: Scalar> Propagator<T> {
    /// Builds the actions `φ_ℓ(τK)` for every `ℓ` in `ells`.
    ///
    /// With `ells == [0]` the split backend only evaluates exponentials.
    pub fn build(
        k: &KroneckerSum<T>,
        tau: f64,
        ells: &[usize],
        backend: Backend,
        rule: &GllRule,
    ) -> Result<Self> {
        let ell_max = ells.iter().copied().max().unwrap_or(0);
        match backend {
            Backend::Split => {
                let all = build_split_phis_with(k, tau, ell_max, rule)?;
                Ok(Propagator::Split(
                    all.into_iter()
                        .enumerate()
                        .map(|(ell, sp)| ells.contains(&ell).then_some(sp))
                        .collect(),
                ))
            }
            Backend::DenseOracle => {
                let op: DenseOperator<T> = assemble_kronsum(&k.scaled(T::from_real(tau)))?;
                let phis = (0..=ell_max)
                    .map(|ell| {
                        if ells.contains(&ell) {
                            phi_taylor_matrix(op.matrix(), ell).map(Some)
                        } else {
                            Ok(None)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Propagator::Dense {
                    dims: k.dims(),
                    phis,
                })
            }
        }
    }
}

impl<T: Scalar> PhiAction<T> for Propagator<T> {
    fn phi(&self, ell: usize, v: &Tensor<T>) -> Result<Tensor<T>> {
        let missing = || Error::Configuration(format!("φ_{ell} was not precomputed"));
        match self {
            Propagator::Split(sps) => {
                let sp = sps.get(ell).and_then(Option::as_ref).ok_or_else(missing)?;
                apply_split_phi(sp, v)
            }
            Propagator::Dense { dims, phis } => {
                let m = phis.get(ell).and_then(Option::as_ref).ok_or_else(missing)?;
                if v.dims() != dims.as_slice() {
                    return Err(Error::dim(format!(
                        "operator acts on {dims:?}, got tensor {:?}",
                        v.dims()
                    )));
                }
                Tensor::unvec(m.matvec(v.vec())?, dims)
            }
        }
    }
}

fn tau_t<T: Scalar>(tau: f64) -> T {
    T::from_real(tau)
}

/// `(U + τ g(t, U)) ×_1 e^{τA_1} ⋯ ×_d e^{τA_d}`.
pub fn lawson_euler_step<T: Scalar>(
    p: &ProblemSpec<T>,
    prop: &impl PhiAction<T>,
    t: f64,
    tau: f64,
    u: &Tensor<T>,
) -> Result<Tensor<T>> {
    let v = u.plus_scaled(tau_t(tau), &p.nonlinearity(t, u)?)?;
    prop.phi(0, &v)
}

/// Lawson–Euler predictor followed by
/// `(U + τ/2 g(t, U)) ×e^{τA} + τ/2 g(t + τ, U_2)`.
pub fn lawson2b_step<T: Scalar>(
    p: &ProblemSpec<T>,
    prop: &impl PhiAction<T>,
    t: f64,
    tau: f64,
    u: &Tensor<T>,
) -> Result<Tensor<T>> {
    let g1 = p.nonlinearity(t, u)?;
    let u2 = prop.phi(0, &u.plus_scaled(tau_t(tau), &g1)?)?;
    let g2 = p.nonlinearity(t + tau, &u2)?;
    let mut out = prop.phi(0, &u.plus_scaled(tau_t(0.5 * tau), &g1)?)?;
    out.axpy(tau_t(0.5 * tau), &g2)?;
    Ok(out)
}

/// `U + τ φ_1(τK)(K U + g(t, U))`.
pub fn exp_euler_step<T: Scalar>(
    p: &ProblemSpec<T>,
    prop: &impl PhiAction<T>,
    t: f64,
    tau: f64,
    u: &Tensor<T>,
) -> Result<Tensor<T>> {
    let f = p.rhs(t, u)?;
    u.plus_scaled(tau_t(tau), &prop.phi(1, &f)?)
}

/// `e^{τK} U + τ φ_1(τK) g(t, U)`.
pub fn exp_euler_linear_split_step<T: Scalar>(
    p: &ProblemSpec<T>,
    prop: &impl PhiAction<T>,
    t: f64,
    tau: f64,
    u: &Tensor<T>,
) -> Result<Tensor<T>> {
    let g = p.nonlinearity(t, u)?;
    prop.phi(0, u)?.plus_scaled(tau_t(tau), &prop.phi(1, &g)?)
}

/// Exponential Euler predictor `U_2`, then
/// `U_2 + τ φ_2(τK)(g(t + τ, U_2) − g(t, U))`.
pub fn etd2rk_step<T: Scalar>(
    p: &ProblemSpec<T>,
    prop: &impl PhiAction<T>,
    t: f64,
    tau: f64,
    u: &Tensor<T>,
) -> Result<Tensor<T>> {
    let g1 = p.nonlinearity(t, u)?;
    let mut f = p.operator().apply(u)?;
    f.axpy(T::one(), &g1)?;
    let u2 = u.plus_scaled(tau_t(tau), &prop.phi(1, &f)?)?;
    let dg = p.nonlinearity(t + tau, &u2)?.sub(&g1)?;
    u2.plus_scaled(tau_t(tau), &prop.phi(2, &dg)?)
}

/// `U + τ φ_1(τ J(U))(K U + g(t, U))` with `J(U) = J_d ⊕ … ⊕ J_1`.
///
/// The Jacobian propagator is built from scratch; the backend and rule decide
/// how.
pub fn rosenbrock_euler_step<T: Scalar>(
    p: &ProblemSpec<T>,
    backend: Backend,
    rule: &GllRule,
    t: f64,
    tau: f64,
    u: &Tensor<T>,
) -> Result<Tensor<T>> {
    let jac = KroneckerSum::new(p.jacobian_factors(u)?)?;
    if jac.dims() != p.operator().dims() {
        return Err(Error::dim("Jacobian factors do not match the operator"));
    }
    let prop = Propagator::build(&jac, tau, &[1], backend, rule)?;
    let f = p.rhs(t, u)?;
    u.plus_scaled(tau_t(tau), &prop.phi(1, &f)?)
}

/// Output of [`integrate`].
#[derive(Clone, Debug)]
pub struct Integration<T: Scalar = f64> {
    pub final_state: Tensor<T>,
    /// `(step, t, U)` for every sampled step, starting with step 0.
    pub trajectory: Vec<(usize, f64, Tensor<T>)>,
    /// Seconds spent building step-invariant factors.
    pub precompute_s: f64,
    /// Seconds spent in the time loop.
    pub loop_s: f64,
}

impl<T: Scalar> Integration<T> {
    pub fn total_s(&self) -> f64 {
        self.precompute_s + self.loop_s
    }
}

/// Runs `c.n_steps` constant steps from `t0` to `T`.
pub fn integrate<T: Scalar>(p: &ProblemSpec<T>, c: &StepperConfig) -> Result<Integration<T>> {
    let mut trajectory = Vec::new();
    let sample = c.sample_every;
    let run = integrate_with(p, c, |step, t, u| {
        if let Some(k) = sample {
            if step % k == 0 {
                trajectory.push((step, t, u.clone()));
            }
        }
        Ok(())
    })?;
    Ok(Integration { trajectory, ..run })
}

/// [`integrate`] with a callback invoked on the initial state and after every
/// step; the callback's time counts towards the loop time.
pub fn integrate_with<T: Scalar>(
    p: &ProblemSpec<T>,
    c: &StepperConfig,
    mut observe: impl FnMut(usize, f64, &Tensor<T>) -> Result<()>,
) -> Result<Integration<T>> {
    c.validate()?;
    if c.method == Method::RosenbrockEuler && p.jacobian.is_none() {
        return Err(Error::Configuration(
            "Rosenbrock–Euler needs Jacobian factors".into(),
        ));
    }
    let n = c.n_steps;
    let tau = (p.t_final - p.t0) / n as f64;

    let started = Instant::now();
    let prop = if c.method == Method::RosenbrockEuler {
        None
    } else {
        Some(Propagator::build(
            &p.k,
            tau,
            c.method.phi_indices(),
            c.backend,
            &c.rule,
        )?)
    };
    let precompute_s = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let mut u = p.u0.clone();
    observe(0, p.t0, &u)?;
    for step in 0..n {
        let t = p.t0 + step as f64 * tau;
        u = match (c.method, prop.as_ref()) {
            (Method::LawsonEuler, Some(pr)) => lawson_euler_step(p, pr, t, tau, &u)?,
            (Method::Lawson2b, Some(pr)) => lawson2b_step(p, pr, t, tau, &u)?,
            (Method::ExpEuler, Some(pr)) => exp_euler_step(p, pr, t, tau, &u)?,
            (Method::ExpEulerLinearSplit, Some(pr)) => {
                exp_euler_linear_split_step(p, pr, t, tau, &u)?
            }
            (Method::Etd2rk, Some(pr)) => etd2rk_step(p, pr, t, tau, &u)?,
            (Method::RosenbrockEuler, _) => {
                rosenbrock_euler_step(p, c.backend, &c.rule, t, tau, &u)?
            }
            (_, None) => unreachable!("propagator is built for every fixed-operator method"),
        };
        let t_next = p.t0 + (step + 1) as f64 * tau;
        if !u.is_finite() {
            return Err(Error::Divergence {
                step: step + 1,
                time: t_next,
            });
        }
        observe(step + 1, t_next, &u)?;
    }
    let loop_s = started.elapsed().as_secs_f64();
    log::debug!(
        "{} {} steps={n}: precompute {precompute_s:.3e}s, loop {loop_s:.3e}s",
        c.method,
        c.backend
    );
    Ok(Integration {
        final_state: u,
        trajectory: Vec::new(),
        precompute_s,
        loop_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{random_stable_matrix, random_tensor, rng};
    use num_complex::Complex64;

    fn scalar_problem(
        lambda: f64,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        u0: f64,
        t_final: f64,
    ) -> ProblemSpec {
        let k = KroneckerSum::new(vec![Matrix::from_diag(&[lambda])]).unwrap();
        let g: Nonlinearity<f64> = Box::new(move |t, u| Ok(u.map(|x| g(t, x))));
        ProblemSpec::new(k, g, Tensor::new(vec![1], vec![u0]).unwrap(), 0.0, t_final).unwrap()
    }

    fn logistic() -> ProblemSpec {
        // u' = -2u + u², u(t) = 2 / (1 + 3 e^{2t}) from u0 = 1/2
        let p = scalar_problem(-2.0, |_, u| u * u, 0.5, 1.0);
        p.with_exact(Box::new(|t| {
            Tensor::new(vec![1], vec![2.0 / (1.0 + 3.0 * (2.0 * t).exp())]).unwrap()
        }))
        .with_jacobian(Box::new(|u| {
            Ok(vec![Matrix::from_diag(&[-2.0 + 2.0 * u.vec()[0]])])
        }))
    }

    fn final_error(p: &ProblemSpec, method: Method, n: usize) -> f64 {
        let out = integrate(p, &StepperConfig::new(method, n)).unwrap();
        out.final_state.rel_diff_inf(&p.exact(p.t_final()).unwrap())
    }

    #[test]
    fn linear_scalar_steps_are_exact() {
        let p = scalar_problem(-1.0, |_, _| 0.0, 1.0, 0.1);
        for m in [
            Method::LawsonEuler,
            Method::Lawson2b,
            Method::ExpEuler,
            Method::ExpEulerLinearSplit,
            Method::Etd2rk,
        ] {
            let out = integrate(&p, &StepperConfig::new(m, 1)).unwrap();
            assert!(
                (out.final_state.vec()[0] - (-0.1f64).exp()).abs() < 1e-15,
                "{m}"
            );
        }
    }

    #[test]
    fn zero_operator_reduces_to_explicit_schemes() {
        // A = 0, u' = cos t: forward Euler and the trapezoidal rule.
        let p = scalar_problem(0.0, |t, _| t.cos(), 0.0, 0.2);
        let fe = integrate(&p, &StepperConfig::new(Method::LawsonEuler, 1)).unwrap();
        assert!((fe.final_state.vec()[0] - 0.2).abs() < 1e-15);
        let heun = 0.1 * (1.0 + 0.2f64.cos());
        for m in [Method::Lawson2b, Method::Etd2rk] {
            let out = integrate(&p, &StepperConfig::new(m, 1)).unwrap();
            assert!((out.final_state.vec()[0] - heun).abs() < 1e-15, "{m}");
        }
    }

    #[test]
    fn constant_forcing_is_exact_for_one_direction() {
        // u' = λu + c: u(τ) = e^{λτ}u0 + τ φ1(λτ) c.
        let (lambda, c, tau) = (-3.0f64, 2.0, 0.4);
        let p = scalar_problem(lambda, move |_, _| c, 1.0, tau);
        let z = lambda * tau;
        let exact = z.exp() + tau * (z.exp() - 1.0) / z * c;
        for m in [
            Method::ExpEuler,
            Method::ExpEulerLinearSplit,
            Method::Etd2rk,
        ] {
            let out = integrate(&p, &StepperConfig::new(m, 1)).unwrap();
            assert!((out.final_state.vec()[0] - exact).abs() < 1e-14, "{m}");
        }
    }

    #[test]
    fn logistic_orders() {
        let p = logistic();
        for m in Method::ALL {
            let e1 = final_error(&p, m, 80);
            let e2 = final_error(&p, m, 160);
            let order = (e1 / e2).log2();
            assert!(
                (order - m.order() as f64).abs() < 0.1,
                "{m}: order {order} ({e1:e}, {e2:e})"
            );
        }
    }

    #[test]
    fn rosenbrock_is_exp_euler_for_linear_problems() {
        let mut r = rng(61);
        let a1 = random_stable_matrix(&mut r, 3, 0.5);
        let a2 = random_stable_matrix(&mut r, 4, 0.5);
        let k = KroneckerSum::new(vec![a1.clone(), a2.clone()]).unwrap();
        let forcing = random_tensor(&mut r, &[3, 4]);
        let g: Nonlinearity<f64> = Box::new(move |_, _| Ok(forcing.clone()));
        let u0 = random_tensor(&mut r, &[3, 4]);
        let p = ProblemSpec::new(k, g, u0, 0.0, 0.5)
            .unwrap()
            .with_jacobian(Box::new(move |_| Ok(vec![a1.clone(), a2.clone()])));
        let a = integrate(&p, &StepperConfig::new(Method::RosenbrockEuler, 5)).unwrap();
        let b = integrate(&p, &StepperConfig::new(Method::ExpEuler, 5)).unwrap();
        assert!(a.final_state.rel_diff_fro(&b.final_state) < 1e-14);
    }

    #[test]
    fn rosenbrock_without_jacobian_is_a_configuration_error() {
        let p = scalar_problem(-1.0, |_, u| u, 1.0, 1.0);
        let err = integrate(&p, &StepperConfig::new(Method::RosenbrockEuler, 2)).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn lawson_backends_agree() {
        let mut r = rng(62);
        let k = KroneckerSum::new(vec![
            random_stable_matrix(&mut r, 3, 0.5),
            random_stable_matrix(&mut r, 4, 0.5),
            random_stable_matrix(&mut r, 2, 0.5),
        ])
        .unwrap();
        let g: Nonlinearity<f64> = Box::new(|t, u| Ok(u.map(|x| (x + t).sin())));
        let p = ProblemSpec::new(k, g, random_tensor(&mut r, &[3, 4, 2]), 0.0, 1.0).unwrap();
        for m in [Method::LawsonEuler, Method::Lawson2b] {
            let a = integrate(&p, &StepperConfig::new(m, 10)).unwrap();
            let cfg = StepperConfig::new(m, 10).backend(Backend::DenseOracle);
            let b = integrate(&p, &cfg).unwrap();
            assert!(a.final_state.rel_diff_fro(&b.final_state) < 1e-12, "{m}");
        }
    }

    #[test]
    fn complex_oscillator() {
        // u' = iω u has |u| = 1 and u(1) = e^{iω}.
        let omega = 3.0;
        let k = KroneckerSum::new(vec![Matrix::from_diag(&[Complex64::new(0.0, omega)])]).unwrap();
        let g: Nonlinearity<Complex64> = Box::new(|_, u| Ok(Tensor::zeros(u.dims())));
        let u0 = Tensor::new(vec![1], vec![Complex64::new(1.0, 0.0)]).unwrap();
        let p = ProblemSpec::new(k, g, u0, 0.0, 1.0).unwrap();
        let out = integrate(&p, &StepperConfig::new(Method::Etd2rk, 3)).unwrap();
        let want = Complex64::new(0.0, omega).exp();
        assert!((out.final_state.vec()[0] - want).norm() < 1e-13);
    }

    #[test]
    fn sampling_and_divergence() {
        let p = scalar_problem(-1.0, |_, u| u * u, 0.5, 1.0);
        let out = integrate(&p, &StepperConfig::new(Method::Etd2rk, 10).sample_every(5)).unwrap();
        let steps: Vec<usize> = out.trajectory.iter().map(|s| s.0).collect();
        assert_eq!(steps, vec![0, 5, 10]);
        assert!((out.trajectory[2].1 - 1.0).abs() < 1e-15);

        // u' = u² from u0 = 2 blows up at t = 1/2.
        let blow = scalar_problem(0.0, |_, u| u * u, 2.0, 5.0);
        let err = integrate(&blow, &StepperConfig::new(Method::LawsonEuler, 50)).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err}");
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("rk4".parse::<Method>().is_err());
        assert_eq!("oracle".parse::<Backend>().unwrap(), Backend::DenseOracle);
    }
}
