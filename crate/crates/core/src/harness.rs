//! Convergence sweeps, steady-state tracking and their CSV/table output.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::integrators::{integrate, integrate_with, Backend, Method, StepperConfig};
use crate::problems::{build_adr, build_riccati, RICCATI_T_FINAL};
use crate::tensor::Tensor;

/// CSV header of a sweep file.
pub const CSV_HEADER: [&str; 7] = [
    "problem",
    "method",
    "steps",
    "tau",
    "error",
    "order",
    "wallclock_s",
];

/// One integration of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub method: Method,
    pub backend: Backend,
    pub steps: usize,
    pub tau: f64,
    pub error: f64,
    /// Observed order against the previous record of the same sweep.
    pub order: Option<f64>,
    /// Precomputation plus time loop.
    pub wallclock_s: f64,
    pub loop_s: f64,
}

/// `p_k = log(e_{k-1}/e_k) / log(τ_{k-1}/τ_k)`, with `None` for the first entry
/// and wherever an error is not positive.
pub fn observed_order(errors: &[f64], taus: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != taus.len() {
        return Err(Error::Validation(format!(
            "{} errors but {} step sizes",
            errors.len(),
            taus.len()
        )));
    }
    let mut out = Vec::with_capacity(errors.len());
    if errors.is_empty() {
        return Ok(out);
    }
    out.push(None);
    for k in 1..errors.len() {
        let (e0, e1, t0, t1) = (errors[k - 1], errors[k], taus[k - 1], taus[k]);
        let ok = e0 > 0.0
            && e1 > 0.0
            && e0.is_finite()
            && e1.is_finite()
            && t0 > 0.0
            && t1 > 0.0
            && t0 != t1;
        out.push(ok.then(|| (e0 / e1).ln() / (t0 / t1).ln()));
    }
    Ok(out)
}

fn fill_orders(records: &mut [RunRecord]) -> Result<()> {
    let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
    let taus: Vec<f64> = records.iter().map(|r| r.tau).collect();
    for (r, o) in records.iter_mut().zip(observed_order(&errors, &taus)?) {
        r.order = o;
    }
    Ok(())
}

/// Step counts used for the ADR problem when none are given.
///
/// Lawson2b switches to a shorter list on fine grids.
pub fn adr_default_steps(method: Method, dims: [usize; 3]) -> Result<Vec<usize>> {
    Ok(match method {
        Method::LawsonEuler => vec![800, 8800, 16800, 24800, 32800],
        Method::ExpEuler | Method::ExpEulerLinearSplit => vec![50, 450, 850, 1250, 1650],
        Method::Lawson2b if dims.iter().copied().max().unwrap_or(0) >= 60 => {
            vec![3000, 4500, 6000, 7500, 9000]
        }
        Method::Lawson2b => vec![1500, 5500, 9500, 13500, 17500],
        Method::Etd2rk => vec![40, 140, 240, 340, 440],
        Method::RosenbrockEuler => {
            return Err(Error::Configuration(
                "the ADR problem has no Kronecker-structured Jacobian".into(),
            ))
        }
    })
}

pub const RICCATI_DEFAULT_STEPS: [usize; 5] = [30, 65, 100, 135, 170];
pub const RICCATI_REFERENCE_STEPS: usize = 4096;

/// Parameters of an ADR sweep.
#[derive(Clone, Debug)]
pub struct AdrRun {
    pub dims: [usize; 3],
    pub methods: Vec<Method>,
    /// Overrides the per-method defaults for every method.
    pub steps: Option<Vec<usize>>,
    pub backend: Backend,
}

impl Default for AdrRun {
    fn default() -> Self {
        Self {
            dims: [40, 41, 42],
            methods: vec![
                Method::LawsonEuler,
                Method::ExpEuler,
                Method::Lawson2b,
                Method::Etd2rk,
            ],
            steps: None,
            backend: Backend::Split,
        }
    }
}

/// Integrates the ADR problem to `T = 1` for every method and step count and
/// measures the relative infinity-norm error against the exact solution.
pub fn run_adr(run: &AdrRun) -> Result<Vec<RunRecord>> {
    let [n1, n2, n3] = run.dims;
    let problem = build_adr(n1, n2, n3)?;
    let spec = problem.to_problem_spec();
    let exact = problem.exact(spec.t_final());
    let label = format!("adr-{n1}x{n2}x{n3}");
    let mut all = Vec::new();
    for &method in &run.methods {
        let steps = match &run.steps {
            Some(s) => s.clone(),
            None => adr_default_steps(method, run.dims)?,
        };
        let mut records = Vec::with_capacity(steps.len());
        for n in steps {
            let cfg = StepperConfig::new(method, n).backend(run.backend);
            let out = integrate(&spec, &cfg).map_err(|e| context(&label, method, n, e))?;
            let error = out.final_state.rel_diff_inf(&exact);
            log::info!(
                "{label} {method} steps={n} error={error:.6e} time={:.2}s",
                out.total_s()
            );
            records.push(RunRecord {
                problem: label.clone(),
                method,
                backend: run.backend,
                steps: n,
                tau: spec.t_final() / n as f64,
                error,
                order: None,
                wallclock_s: out.total_s(),
                loop_s: out.loop_s,
            });
        }
        fill_orders(&mut records)?;
        all.extend(records);
    }
    Ok(all)
}

fn context(label: &str, method: Method, n: usize, e: Error) -> Error {
    match e {
        Error::Divergence { .. } => {
            log::error!("{label} {method} with {n} steps diverged");
            e
        }
        other => other,
    }
}

/// Parameters of a Riccati sweep.
#[derive(Clone, Debug)]
pub struct RiccatiRun {
    pub n_hat: usize,
    pub methods: Vec<Method>,
    pub steps: Vec<usize>,
    pub backend: Backend,
    /// ETD2RK split steps used for the reference solution.
    pub reference_steps: usize,
    pub t_final: f64,
}

impl Default for RiccatiRun {
    fn default() -> Self {
        Self {
            n_hat: 30,
            methods: vec![Method::RosenbrockEuler, Method::Etd2rk],
            steps: RICCATI_DEFAULT_STEPS.to_vec(),
            backend: Backend::Split,
            reference_steps: RICCATI_REFERENCE_STEPS,
            t_final: RICCATI_T_FINAL,
        }
    }
}

/// ETD2RK split solution of the Riccati problem with `steps` steps.
pub fn riccati_reference(n_hat: usize, t_final: f64, steps: usize) -> Result<Tensor> {
    let spec = build_riccati(n_hat)?.to_problem_spec(t_final)?;
    let out = integrate(&spec, &StepperConfig::new(Method::Etd2rk, steps))?;
    log::info!(
        "riccati reference n_hat={n_hat} steps={steps} time={:.2}s",
        out.total_s()
    );
    Ok(out.final_state)
}

/// Integrates the Riccati problem and measures the relative Frobenius error
/// against an ETD2RK reference.
pub fn run_riccati(run: &RiccatiRun) -> Result<Vec<RunRecord>> {
    let reference = riccati_reference(run.n_hat, run.t_final, run.reference_steps)?;
    run_riccati_against(run, &reference)
}

/// [`run_riccati`] with a precomputed reference.
pub fn run_riccati_against(run: &RiccatiRun, reference: &Tensor) -> Result<Vec<RunRecord>> {
    let spec = build_riccati(run.n_hat)?.to_problem_spec(run.t_final)?;
    let label = format!("riccati-{}", run.n_hat);
    let mut all = Vec::new();
    for &method in &run.methods {
        let mut records = Vec::with_capacity(run.steps.len());
        for &n in &run.steps {
            let cfg = StepperConfig::new(method, n).backend(run.backend);
            let out = integrate(&spec, &cfg).map_err(|e| context(&label, method, n, e))?;
            let error = out.final_state.rel_diff_fro(reference);
            log::info!(
                "{label} {method} steps={n} error={error:.6e} time={:.2}s",
                out.total_s()
            );
            records.push(RunRecord {
                problem: label.clone(),
                method,
                backend: run.backend,
                steps: n,
                tau: run.t_final / n as f64,
                error,
                order: None,
                wallclock_s: out.total_s(),
                loop_s: out.loop_s,
            });
        }
        fill_orders(&mut records)?;
        all.extend(records);
    }
    Ok(all)
}

/// Parameters of a steady-state run.
#[derive(Clone, Debug)]
pub struct SteadyRun {
    pub n_hat: usize,
    pub n_steps: usize,
    pub sample_every: usize,
    pub t_final: f64,
    pub methods: Vec<Method>,
}

impl Default for SteadyRun {
    fn default() -> Self {
        Self {
            n_hat: 20,
            n_steps: 200,
            sample_every: 10,
            t_final: 0.2,
            methods: vec![Method::RosenbrockEuler, Method::Etd2rk],
        }
    }
}

/// Relative algebraic Riccati residual at one sampled step.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadySample {
    pub method: Method,
    pub step: usize,
    pub t: f64,
    pub relative_residual: f64,
    /// [`crate::problems::RiccatiProblem::residual_rounding_level`] at this state.
    pub rounding_level: f64,
}

/// Tracks `‖AᵀU + UA + C + UBU‖_F / ‖C‖_F` along the Riccati flow.
pub fn run_steady(run: &SteadyRun) -> Result<Vec<SteadySample>> {
    if run.sample_every == 0 {
        return Err(Error::Validation("sample_every must be positive".into()));
    }
    let problem = build_riccati(run.n_hat)?;
    let spec = problem.to_problem_spec(run.t_final)?;
    let mut samples = Vec::new();
    for &method in &run.methods {
        let cfg = StepperConfig::new(method, run.n_steps);
        integrate_with(&spec, &cfg, |step, t, u| {
            if step % run.sample_every == 0 || step == run.n_steps {
                let m = u.to_matrix()?;
                let relative_residual = problem.relative_residual(&m)?;
                let rounding_level = problem.residual_rounding_level(&m)?;
                log::debug!("steady {method} step={step} residual={relative_residual:.3e}");
                samples.push(SteadySample {
                    method,
                    step,
                    t,
                    relative_residual,
                    rounding_level,
                });
            }
            Ok(())
        })?;
    }
    Ok(samples)
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a sweep as CSV; `loop_column` appends the loop-only time.
pub fn write_csv<W: Write>(w: W, records: &[RunRecord], loop_column: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if loop_column {
        header.push("loop_s");
    }
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.problem.clone(),
            r.method.name().to_string(),
            r.steps.to_string(),
            sci(r.tau),
            sci(r.error),
            r.order.map(sci).unwrap_or_default(),
            sci(r.wallclock_s),
        ];
        if loop_column {
            row.push(sci(r.loop_s));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, records: &[RunRecord], loop_column: bool) -> Result<()> {
    write_csv(std::fs::File::create(path)?, records, loop_column)
}

/// Writes steady-state samples as `problem,method,step,t,relative_residual`.
pub fn write_steady_csv<W: Write>(w: W, n_hat: usize, samples: &[SteadySample]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["problem", "method", "step", "t", "relative_residual"])?;
    for s in samples {
        out.write_record([
            format!("steady-{n_hat}"),
            s.method.name().to_string(),
            s.step.to_string(),
            sci(s.t),
            sci(s.relative_residual),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Plain-text table with one block per method: a steps row, an order row and
/// an error row.
pub fn render_table(records: &[RunRecord]) -> String {
    let mut groups: Vec<(String, Method, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        match groups
            .iter_mut()
            .find(|(p, m, _)| *p == r.problem && *m == r.method)
        {
            Some(g) => g.2.push(r),
            None => groups.push((r.problem.clone(), r.method, vec![r])),
        }
    }
    let mut s = String::new();
    for (problem, method, rows) in groups {
        let name = format!("{problem} {method}");
        s.push_str(&format!("{name}\n"));
        let cell = |v: String| format!("{v:>12}");
        let steps: String = rows.iter().map(|r| cell(r.steps.to_string())).collect();
        let orders: String = rows
            .iter()
            .map(|r| cell(r.order.map_or("--".into(), |o| format!("{o:.2}"))))
            .collect();
        let errors: String = rows
            .iter()
            .map(|r| cell(format!("{:.3e}", r.error)))
            .collect();
        let times: String = rows
            .iter()
            .map(|r| cell(format!("{:.2}", r.wallclock_s)))
            .collect();
        s.push_str(&format!("  {:<8}|{steps}\n", "steps"));
        s.push_str(&format!("  {:<8}|{orders}\n", "order"));
        s.push_str(&format!("  {:<8}|{errors}\n", "error"));
        s.push_str(&format!("  {:<8}|{times}\n", "time [s]"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_from_log_ratios() {
        let o = observed_order(&[1e-2, 2.5e-3], &[0.2, 0.1]).unwrap();
        assert_eq!(o[0], None);
        assert!((o[1].unwrap() - 2.0).abs() < 1e-14);
        let o = observed_order(&[1e-3, 1e-3], &[0.2, 0.1]).unwrap();
        assert_eq!(o[1], Some(0.0));
        let o = observed_order(&[1e-3, 0.0, 1e-4], &[0.3, 0.2, 0.1]).unwrap();
        assert_eq!(o, vec![None, None, None]);
        assert!(observed_order(&[1.0], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn default_sweeps() {
        assert_eq!(
            adr_default_steps(Method::Lawson2b, [80, 81, 82]).unwrap(),
            vec![3000, 4500, 6000, 7500, 9000]
        );
        assert_eq!(
            adr_default_steps(Method::Lawson2b, [40, 41, 42]).unwrap()[0],
            1500
        );
        assert!(adr_default_steps(Method::RosenbrockEuler, [4, 4, 4]).is_err());
    }

    #[test]
    fn small_adr_sweep_and_csv() {
        let run = AdrRun {
            dims: [5, 6, 7],
            methods: vec![Method::Etd2rk],
            steps: Some(vec![20, 40]),
            backend: Backend::Split,
        };
        let records = run_adr(&run).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records[0].order.is_none());
        assert!(records[1].error < records[0].error);

        let mut buf = Vec::new();
        write_csv(&mut buf, &records, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "problem,method,steps,tau,error,order,wallclock_s"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "adr-5x6x7");
        assert_eq!(first[2], "20");
        assert_eq!(first[3], "5.0000000000000003e-2");
        assert_eq!(first[3].parse::<f64>().unwrap(), 1.0 / 20.0);
        assert_eq!(first[5], "");
        let second: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert!(second[5].parse::<f64>().is_ok());

        let table = render_table(&records);
        assert!(table.contains("adr-5x6x7 etd2rk"));
        assert!(table.contains("--"));
    }

    #[test]
    fn steady_starts_at_one() {
        let run = SteadyRun {
            n_hat: 4,
            n_steps: 4,
            sample_every: 2,
            t_final: 0.01,
            methods: vec![Method::Etd2rk],
        };
        let s = run_steady(&run).unwrap();
        assert_eq!(s.iter().map(|x| x.step).collect::<Vec<_>>(), vec![0, 2, 4]);
        assert!((s[0].relative_residual - 1.0).abs() < 1e-15);
    }
}
