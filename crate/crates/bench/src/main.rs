use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kronphi::harness::{
    render_table, run_adr, run_riccati, run_steady, write_csv, write_csv_file, write_steady_csv,
    AdrRun, RiccatiRun, SteadyRun, RICCATI_DEFAULT_STEPS, RICCATI_REFERENCE_STEPS,
};
use kronphi::integrators::{Backend, Method};
use kronphi::problems::RICCATI_T_FINAL;
use kronphi::selftest::{selftest, SelftestOptions};
use kronphi::Error;

/// Convergence and steady-state benchmarks for split φ-function integrators.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 3D advection–diffusion–reaction convergence sweep.
    Adr(AdrArgs),
    /// Riccati convergence sweep against an ETD2RK reference.
    Riccati(RiccatiArgs),
    /// Riccati residual along the flow towards the steady state.
    Steady(SteadyArgs),
    /// Invariant checks against the dense oracles.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct Output {
    /// CSV file for the sweep (stdout table only when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append a loop-only wall-clock column.
    #[arg(long)]
    loop_time: bool,
    /// Print CSV to stdout instead of the table.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct AdrArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [40, 41, 42])]
    dims: Vec<usize>,
    /// Methods to run (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [Method::LawsonEuler, Method::ExpEuler, Method::Lawson2b, Method::Etd2rk].map(|m| m.name().to_string()))]
    methods: Vec<String>,
    /// Step counts for every method (per-method defaults when absent).
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<usize>>,
    #[arg(long, default_value = "split")]
    backend: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RiccatiArgs {
    #[arg(long, default_value_t = 30)]
    nhat: usize,
    #[arg(long, value_delimiter = ',', default_values_t = ["rosenbrock-euler".to_string(), "etd2rk".to_string()])]
    methods: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = RICCATI_DEFAULT_STEPS)]
    steps: Vec<usize>,
    #[arg(long, default_value = "split")]
    backend: String,
    /// ETD2RK steps for the reference solution.
    #[arg(long, default_value_t = RICCATI_REFERENCE_STEPS)]
    reference_steps: usize,
    #[arg(long, default_value_t = RICCATI_T_FINAL)]
    t_final: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SteadyArgs {
    #[arg(long, default_value_t = 20)]
    nhat: usize,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = 10)]
    sample_every: usize,
    #[arg(long, default_value_t = 0.2)]
    t_final: f64,
    #[arg(long, value_delimiter = ',', default_values_t = ["rosenbrock-euler".to_string(), "etd2rk".to_string()])]
    methods: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Use (ℓ!)^d as the splitting prefactor.
    #[arg(long)]
    wrong_prefactor: bool,
    /// Lobatto nodes for the φ quadrature.
    #[arg(long, default_value_t = kronphi::matfun::DEFAULT_GLL_NODES)]
    gll_nodes: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>> {
    names
        .iter()
        .map(|s| s.parse::<Method>().map_err(Into::into))
        .collect()
}

fn emit(records: &[kronphi::harness::RunRecord], output: &Output) -> Result<()> {
    if let Some(path) = &output.out {
        write_csv_file(path, records, output.loop_time)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if output.csv {
        write_csv(io::stdout().lock(), records, output.loop_time)?;
    } else {
        print!("{}", render_table(records));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Adr(a) => {
            let dims: [usize; 3] = a
                .dims
                .clone()
                .try_into()
                .map_err(|_| anyhow::anyhow!("--dims needs exactly three sizes"))?;
            let run = AdrRun {
                dims,
                methods: parse_methods(&a.methods)?,
                steps: a.steps.clone(),
                backend: a.backend.parse::<Backend>()?,
            };
            emit(&run_adr(&run)?, &a.output)?;
        }
        Command::Riccati(a) => {
            let run = RiccatiRun {
                n_hat: a.nhat,
                methods: parse_methods(&a.methods)?,
                steps: a.steps.clone(),
                backend: a.backend.parse::<Backend>()?,
                reference_steps: a.reference_steps,
                t_final: a.t_final,
            };
            emit(&run_riccati(&run)?, &a.output)?;
        }
        Command::Steady(a) => {
            let run = SteadyRun {
                n_hat: a.nhat,
                n_steps: a.steps,
                sample_every: a.sample_every,
                t_final: a.t_final,
                methods: parse_methods(&a.methods)?,
            };
            let samples = run_steady(&run)?;
            match &a.out {
                Some(path) => write_steady_csv(
                    std::fs::File::create(path)
                        .with_context(|| format!("creating {}", path.display()))?,
                    a.nhat,
                    &samples,
                )?,
                None => write_steady_csv(io::stdout().lock(), a.nhat, &samples)?,
            }
        }
        Command::Selftest(a) => {
            if a.gll_nodes < 2 {
                bail!("--gll-nodes must be at least 2");
            }
            let checks = selftest(&SelftestOptions {
                wrong_prefactor: a.wrong_prefactor,
                gll_nodes: a.gll_nodes,
                seed: a.seed,
            })?;
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if matches!(e.downcast_ref::<Error>(), Some(Error::Divergence { .. })) {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
