//! `rfs`: sweeps, scaling tables, analytic curves and acceptance checks.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 numerical failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rfs_core::analytic::{analytic_curves, ThermoParams};
use rfs_core::eig::{ground_state, LanczosOptions, SolverKind, SolverOptions};
use rfs_core::models::{ground_basis, ModelSpec};
use rfs_core::output::{write_analytic, write_scaling, write_sweep, Format};
use rfs_core::sweep::{linear_grid, run_sweep, scaling_table, SweepConfig};
use rfs_core::{acceptance, Error, Route, Spin};

#[derive(Parser)]
#[command(name = "rfs", version, about = "Fidelity susceptibilities of SU(2) spin chains by exact diagonalization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Observables and susceptibilities on a parameter grid.
    Sweep(SweepArgs),
    /// Pseudo-critical points for several chain lengths.
    Scaling(ScalingArgs),
    /// Four-site and thermodynamic-limit closed forms on an alpha grid.
    Analytic(AnalyticArgs),
    /// Run the acceptance checks and print a pass/fail table.
    Verify(VerifyArgs),
    /// Sector, dimension and ground-state summary of one model.
    ModelInfo(InfoArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModelArg {
    Dimer,
    Mixed,
    Bb,
}

#[derive(Copy, Clone, ValueEnum)]
enum SolverArg {
    Lanczos,
    Dense,
}

#[derive(Copy, Clone, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "dimer")]
    model: ModelArg,
    /// Number of sites (even for the dimer families).
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Larger spin of the mixed chain, e.g. `1` or `3/2`.
    #[arg(long, default_value = "1")]
    spin_s: String,
    #[arg(long, value_enum, default_value = "lanczos")]
    solver: SolverArg,
    #[arg(long, default_value_t = LanczosOptions::default().seed)]
    seed: u64,
}

#[derive(Args)]
struct InfoArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Control parameter (`alpha`, or `theta` in radians).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    param: f64,
}

#[derive(Args)]
struct GridArgs {
    /// Defaults to 0.1 (dimer, mixed) or -0.9 (bb).
    #[arg(long, allow_negative_numbers = true)]
    param_min: Option<f64>,
    /// Defaults to 1.6 (dimer, mixed) or 0.9 (bb).
    #[arg(long, allow_negative_numbers = true)]
    param_max: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Comma-separated subset of uhlmann,spectra,correlator,energy,global.
    #[arg(long, default_value = "energy")]
    routes: String,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated chain lengths, ascending.
    #[arg(long, default_value = "6,8,10,12")]
    sizes: String,
    /// Column whose peak is tracked.
    #[arg(long, default_value = "chi23_energy")]
    column: String,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long, default_value_t = 0.05)]
    param_min: f64,
    #[arg(long, default_value_t = 0.999)]
    param_max: f64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = ThermoParams::default().c)]
    c: f64,
    #[arg(long, default_value_t = ThermoParams::default().p)]
    p: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated check ids; all when absent.
    #[arg(long)]
    only: Option<String>,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_)
            | Error::InvalidSweep(_)
            | Error::InvalidSites(_)
            | Error::UnsupportedSpin(_)
            | Error::SpecMismatch(_)
            | Error::StepTooSmall { .. }
            | Error::DimensionCap { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn model_spec(args: &ModelArgs, param: f64) -> Result<ModelSpec, Failure> {
    let spec = match args.model {
        ModelArg::Dimer => ModelSpec::dimer(args.n, param),
        ModelArg::Bb => ModelSpec::bilinear_biquadratic(args.n, param),
        ModelArg::Mixed => {
            if !args.n.is_multiple_of(2) {
                return Err(Failure::Usage(format!("mixed chains need an even --n, got {}", args.n)));
            }
            ModelSpec::mixed(args.n / 2, Spin::parse(&args.spin_s)?, param)
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn solver(args: &ModelArgs) -> SolverOptions {
    let kind = match args.solver {
        SolverArg::Lanczos => SolverKind::Lanczos,
        SolverArg::Dense => SolverKind::Dense,
    };
    SolverOptions { kind, lanczos: LanczosOptions { seed: args.seed, ..Default::default() }, ..Default::default() }
}

fn grid(args: &GridArgs, model: ModelArg) -> Result<Vec<f64>, Failure> {
    let (lo, hi, steps) = match model {
        ModelArg::Bb => (-0.9, 0.9, 37),
        _ => (0.1, 1.6, 76),
    };
    Ok(linear_grid(args.param_min.unwrap_or(lo), args.param_max.unwrap_or(hi), args.steps.unwrap_or(steps))?)
}

fn parse_routes(s: &str) -> Result<Vec<Route>, Failure> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.parse::<Route>().map_err(Failure::from)).collect()
}

fn sweep_setup(run: &RunArgs) -> Result<(ModelSpec, Vec<f64>, SweepConfig), Failure> {
    let grid = grid(&run.grid, run.model.model)?;
    let spec = model_spec(&run.model, grid[0])?;
    let cfg = SweepConfig {
        routes: parse_routes(&run.routes)?.into_iter().collect(),
        delta: run.delta,
        fd_step: run.fd_step,
        solver: solver(&run.model),
        threads: run.threads.max(1),
    };
    Ok((spec, grid, cfg))
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let (spec, grid, cfg) = sweep_setup(&args.run)?;
    let records = run_sweep(&spec, &grid, &cfg)?;
    let mut out = sink(&args.run.output)?;
    write_sweep(&mut out, args.run.format.into(), &spec, &cfg, &records)?;
    out.flush()?;
    Ok(())
}

fn cmd_scaling(args: &ScalingArgs) -> Result<(), Failure> {
    let (spec, grid, cfg) = sweep_setup(&args.run)?;
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| Failure::Usage(format!("bad size {t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    let table = scaling_table(&spec, &sizes, &grid, &cfg, &args.column)?;
    let mut out = sink(&args.run.output)?;
    write_scaling(&mut out, args.run.format.into(), &spec, &cfg, &table)?;
    out.flush()?;
    if !table.param_monotone || !table.chi_monotone {
        eprintln!(
            "warning: peaks not monotone in size (param {}, height {})",
            table.param_monotone, table.chi_monotone
        );
    }
    Ok(())
}

fn cmd_analytic(args: &AnalyticArgs) -> Result<(), Failure> {
    let params = ThermoParams::new(args.c, args.p).map_err(|e| Failure::Usage(e.to_string()))?;
    let grid = linear_grid(args.param_min, args.param_max, args.steps)?;
    let records = analytic_curves(&grid, &params);
    let mut out = sink(&args.output)?;
    write_analytic(&mut out, args.format.into(), &params, &records)?;
    out.flush()?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let ids: Vec<u8> = match &args.only {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<u8>().map_err(|e| Failure::Usage(format!("bad check id {t:?}: {e}"))))
            .collect::<Result<_, _>>()?,
        None => acceptance::CHECKS.iter().map(|c| c.0).collect(),
    };
    let mut all = true;
    for id in ids {
        let outcome = acceptance::run(id).ok_or_else(|| Failure::Usage(format!("no check with id {id}")))?;
        println!("{outcome}");
        all &= outcome.passed;
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn cmd_model_info(info: &InfoArgs) -> Result<(), Failure> {
    let args = &info.model;
    let spec = model_spec(args, info.param)?;
    let basis = ground_basis(&spec)?;
    let gs = ground_state(&spec, &solver(args))?;
    println!("model        {}", spec.family.name());
    println!("sites        {}", spec.n_sites);
    println!("{:<12} {}", spec.family.param_name(), spec.param);
    println!("sector Sz    {}", basis.total_sz());
    println!("dimension    {}", basis.len());
    println!("energy       {:.12}", gs.energy);
    println!("e0 per spin  {:.12}", gs.energy_per_spin);
    println!("gap          {:.6e}", gs.gap);
    println!("residual     {:.3e}", gs.residual);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::Analytic(a) => cmd_analytic(a),
        Command::Verify(a) => cmd_verify(a),
        Command::ModelInfo(a) => cmd_model_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
