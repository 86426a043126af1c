//! walksim — simulate, classify, and statistically probe zero-drift
//! spatially non-homogeneous random walks.
//!
//! Exit codes: 0 on success with a definite result, 1 on usage or runtime
//! errors, 2 when a classification is indeterminate.

mod commands;
mod manifest;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "walksim", version, about = "Elliptic random walk simulator and classifier")]
struct Cli {
    /// Worker threads for walk-level parallelism (overrides WALKSIM_THREADS;
    /// defaults to all cores). Results never depend on the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the recurrence/transience verdict as JSON.
    Classify(ClassifyArgs),
    /// Simulate walks and write trajectories plus a run manifest.
    Simulate(SimulateArgs),
    /// Estimate or exactly compute increment/radial moments.
    Estimate(EstimateArgs),
    /// Run a statistical experiment and print its report as JSON.
    Diagnose(DiagnoseArgs),
    /// Convert a planar trajectory file to plot-ready data with a
    /// time-coloring column.
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Elliptic,
    Parametrized2d,
    Tilted,
    Custom1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EpsDecayArg {
    /// The covariance is exactly constant along rays.
    Zero,
    /// Polynomial decay with exponent --delta0.
    Poly,
    /// No decay information (boundary cases become indeterminate).
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimateMode {
    Increment,
    Radial,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentArg {
    Return,
    Occupation,
    Nonconfinement,
    Lyapunov,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Ambient dimension (model mode, together with --a/--b).
    #[arg(long)]
    dim: Option<usize>,
    /// Radial semi-axis scale.
    #[arg(long)]
    a: Option<f64>,
    /// Transverse semi-axis scale.
    #[arg(long)]
    b: Option<f64>,
    /// Tilt angle in [0, pi); selects the tilted criterion.
    #[arg(long)]
    alpha: Option<f64>,
    /// Radial variance U (raw mode, together with --v).
    #[arg(long)]
    u: Option<f64>,
    /// Total variance V (raw mode).
    #[arg(long)]
    v: Option<f64>,
    /// Covariance decay regime for raw mode boundary cases.
    #[arg(long, value_enum, default_value_t = EpsDecayArg::Unknown)]
    eps_decay: EpsDecayArg,
    /// Decay exponent for --eps-decay poly.
    #[arg(long)]
    delta0: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Tilt angle; implies the tilted kernel unless --kernel says otherwise.
    #[arg(long)]
    alpha: Option<f64>,
    /// Increment law (default: elliptic, or tilted when --alpha is given).
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Steps per walk.
    #[arg(long)]
    steps: usize,
    /// Number of independent walks; walk w uses RNG stream w.
    #[arg(long, default_value_t = 1)]
    walks: usize,
    #[arg(long)]
    seed: u64,
    /// Output path; a manifest is written alongside as `<out>.manifest.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Keep every k-th position (step 0 is always kept).
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// Start point as comma-separated coordinates (default: the origin).
    #[arg(long)]
    start: Option<String>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    mode: EstimateMode,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Position for increment mode, comma-separated (default: the origin).
    #[arg(long)]
    x: Option<String>,
    /// Radii for radial mode, comma-separated ascending.
    #[arg(long)]
    radii: Option<String>,
    /// Radius for quadrature mode.
    #[arg(long)]
    r: Option<f64>,
    /// Monte Carlo samples per estimate.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Nodes for the quadrature oracle.
    #[arg(long, default_value_t = 128)]
    quad_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON report here (with a manifest).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long, value_enum)]
    experiment: ExperimentArg,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Inner ball radius (return experiment).
    #[arg(long, default_value_t = 5.0)]
    r: f64,
    /// Outer escape radius R (return experiment).
    #[arg(long = "big-r", default_value_t = 200.0)]
    big_r: f64,
    /// Starting radius for return and occupation walks.
    #[arg(long, default_value_t = 20.0)]
    start_radius: f64,
    #[arg(long, default_value_t = 2000)]
    walks: usize,
    #[arg(long, default_value_t = 1_000_000)]
    step_cap: usize,
    /// Ball radius (occupation experiment).
    #[arg(long, default_value_t = 10.0)]
    radius: f64,
    /// Occupation checkpoints, comma-separated ascending.
    #[arg(long, default_value = "1000,10000,100000,1000000")]
    checkpoints: String,
    /// Radial scale of a second walk to run alongside the return experiment;
    /// both runs' intervals land in one report for comparison.
    #[arg(long)]
    compare_a: Option<f64>,
    /// Transverse scale of the comparison walk.
    #[arg(long)]
    compare_b: Option<f64>,
    /// Displacement threshold (non-confinement experiment).
    #[arg(long, default_value_t = 10.0)]
    x_threshold: f64,
    /// Horizon for the non-confinement experiment.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Magnitude of the two-point jump on x >= 0 (lyapunov experiment).
    #[arg(long, default_value_t = 1.0)]
    pos_jump: f64,
    /// Magnitude of the two-point jump on x < 0 (lyapunov experiment).
    #[arg(long, default_value_t = 2.0)]
    neg_jump: f64,
    /// Smallest |x| on the lyapunov grid.
    #[arg(long, default_value_t = 10.0)]
    x_min: f64,
    /// Largest |x| on the lyapunov grid.
    #[arg(long, default_value_t = 1000.0)]
    x_max: f64,
    /// Grid points per sign (the grid is mirrored to negative x).
    #[arg(long, default_value_t = 50)]
    grid_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON report here (with a manifest).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotdataArgs {
    /// Trajectory CSV produced by `walksim simulate`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Walk id to extract when the file holds several walks.
    #[arg(long)]
    walk: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    init_thread_pool(cli.threads);
    let result = match cli.command {
        Command::Classify(args) => commands::run_classify(args),
        Command::Simulate(args) => commands::run_simulate(args),
        Command::Estimate(args) => commands::run_estimate(args),
        Command::Diagnose(args) => commands::run_diagnose(args),
        Command::Plotdata(args) => commands::run_plotdata(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("walksim: {err}");
            ExitCode::from(1)
        }
    }
}

fn init_thread_pool(threads: Option<usize>) {
    let n = threads.or_else(|| std::env::var("WALKSIM_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(n) = n.filter(|&n| n > 0) {
        // Only configurable once per process; later calls are no-ops.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
