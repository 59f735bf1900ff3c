//! Command-line front end.
//!
//! Subcommands: `simulate` (generate trajectory data), `analyze` (decide
//! informativity and synthesize a gain), `sweep` (stepsize table), `region`
//! (scalar consistency-set scans), `reproduce-paper` (rerun the published
//! benchmark and compare every number).
//!
//! Exit codes are a stable contract: 0 for success/informative, 1 for a
//! negative verdict, 2 for usage, format or i/o errors. Parameters may come
//! from flags or from a `key = value` config file with one `[section]` per
//! subcommand; flags override file values.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;
mod signal_spec;
mod svg;

pub use output::fmt9;

/// Usage, format and i/o failures; all map to exit code 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(format!("i/o error: {e}"))
    }
}

macro_rules! from_error {
    ($ty:ty) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError(e.to_string())
            }
        }
    };
}
from_error!(crate::signals::SignalError);
from_error!(crate::signals::csv::TrajectoryCsvError);
from_error!(crate::noise::NoiseError);
from_error!(crate::informativity::InformativityError);
from_error!(crate::linalg::LinalgError);

#[derive(Parser, Debug)]
#[command(
    name = "qstab",
    version,
    about = "Informativity analysis and stabilizer synthesis for continuous-time systems from measured or sampled data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate an LTI system (or emit the built-in benchmark trajectory)
    /// and write it as a trajectory CSV.
    Simulate(SimulateArgs),
    /// Decide informativity for quadratic stabilization from a trajectory
    /// CSV and synthesize a feedback gain.
    Analyze(AnalyzeArgs),
    /// Tabulate sampled-data verdicts and margins over a list of stepsizes.
    Sweep(SweepArgs),
    /// Scan scalar consistency sets over an (a, b) window.
    Region(RegionArgs),
    /// Rerun the published scalar benchmark and compare against the
    /// reference values.
    #[command(name = "reproduce-paper")]
    ReproducePaper(ReproduceArgs),
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    /// Config file with a [simulate] section (flags override).
    #[arg(long)]
    config: Option<String>,
    /// Emit the built-in benchmark dataset instead of simulating.
    #[arg(long, default_value_t = false)]
    paper_example: bool,
    /// State matrix, semicolon-separated rows: "a11,a12;a21,a22".
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Input matrix, semicolon-separated rows.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Initial state, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Input signal spec, one per channel joined by '|':
    /// const:v | ramp:v0,slope | sin:amp,omega,phase | pwl:t0,v0,t1,v1,...
    #[arg(long, allow_hyphen_values = true)]
    input: Option<String>,
    /// Noise signal spec (same grammar as --input); defaults to zero.
    #[arg(long, allow_hyphen_values = true)]
    noise: Option<String>,
    /// Grid step.
    #[arg(long)]
    h: Option<f64>,
    /// Horizon T.
    #[arg(long)]
    horizon: Option<f64>,
    /// Output trajectory CSV path.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct AnalyzeArgs {
    #[arg(long)]
    config: Option<String>,
    /// Trajectory CSV path.
    #[arg(long)]
    data: Option<String>,
    /// cont | sampled | sampled-sufficient.
    #[arg(long)]
    mode: Option<String>,
    /// Sampling stepsize (sampled modes).
    #[arg(long)]
    delta: Option<f64>,
    /// Noise budget Q, semicolon-separated rows; defaults to identity.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Assumed square-Lipschitz constant of the noise.
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Assumed total square variation of the noise.
    #[arg(long)]
    tsv: Option<f64>,
    /// Certificate document output path.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    data: Option<String>,
    /// Comma-separated stepsizes.
    #[arg(long)]
    deltas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Assumed square-Lipschitz constant; enables the sufficiency columns.
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct RegionArgs {
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Assumed square-Lipschitz constant for the inflated-budget layer.
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b_max: Option<f64>,
    /// Grid resolution along a.
    #[arg(long)]
    na: Option<usize>,
    /// Grid resolution along b.
    #[arg(long)]
    nb: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
    /// Optional SVG rendering path.
    #[arg(long)]
    svg: Option<String>,
    /// Worker threads for the scan.
    #[arg(long)]
    workers: Option<usize>,
    /// Marker "a,b" drawn on the SVG; repeatable. Defaults to the benchmark
    /// systems (-1, 0.1) and (4.35, -3).
    #[arg(long, allow_hyphen_values = true)]
    mark: Vec<String>,
}

#[derive(Args, Debug, Default)]
pub struct ReproduceArgs {
    /// Reproduction grid step.
    #[arg(long, default_value_t = crate::benchmark::DEFAULT_GRID_STEP)]
    h: f64,
    /// Comparison tolerance against the reference matrices.
    #[arg(long, default_value_t = crate::benchmark::MATRIX_TOL)]
    tol: f64,
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Region(args) => commands::region(args),
        Command::ReproducePaper(args) => commands::reproduce_paper(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
