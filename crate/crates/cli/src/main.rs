//! `twofold`: command-line front end for the two-fold analysis library.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 orbit does not
//! close, 4 integrator failure, 5 verification tolerance breached.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "twofold",
    version,
    about = "Two-fold singularities of piecewise-smooth 3D vector fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the singularity and report orbit families.
    Classify(ClassifyArgs),
    /// Iterate the first-return map from a point of Σ (CSV).
    ReturnMap(ReturnMapArgs),
    /// Periodic and pseudo-periodic families; optionally build one orbit.
    Orbits(OrbitsArgs),
    /// Integrate the Filippov system numerically (CSV).
    Simulate(SimulateArgs),
    /// Compare the numerical return map with the closed form on random points.
    Verify(VerifyArgs),
    /// Draw the switching plane as SVG.
    Plot(PlotArgs),
}

/// Normal-form coefficients, given as flags or as a spec file.
#[derive(Args, Clone)]
pub struct CoeffArgs {
    #[arg(long = "cx", allow_negative_numbers = true)]
    pub cx: Option<f64>,
    #[arg(long = "cy", allow_negative_numbers = true)]
    pub cy: Option<f64>,
    #[arg(long = "cxy", allow_negative_numbers = true)]
    pub cxy: Option<f64>,
    #[arg(long = "cyx", allow_negative_numbers = true)]
    pub cyx: Option<f64>,
    /// TOML field spec (coefficients plus optional perturbations); replaces
    /// the coefficient flags.
    #[arg(long, conflicts_with_all = ["cx", "cy", "cxy", "cyx"])]
    pub spec: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReturnMapArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
    /// Number of iterations.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct OrbitsArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long, allow_negative_numbers = true, requires = "anchor_y")]
    pub anchor_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "anchor_x")]
    pub anchor_y: Option<f64>,
    /// JSON report destination (stdout by default).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of the sampled orbit through the anchor.
    #[arg(long, requires = "anchor_x")]
    pub orbit_out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct IntegratorArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub event_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_events: usize,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub z0: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    /// Integrate backward in time.
    #[arg(long)]
    pub backward: bool,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Trajectory CSV destination (stdout by default).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub events_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Regions,
    Map,
    Orbit,
}

#[derive(Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long, value_enum, default_value = "regions")]
    pub what: PlotKind,
    /// Start of the iterates for `--what map`.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub y: f64,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Orbit anchor for `--what orbit`.
    #[arg(long, allow_negative_numbers = true, requires = "anchor_y")]
    pub anchor_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "anchor_x")]
    pub anchor_y: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(a) => commands::classify(a),
        Command::ReturnMap(a) => commands::return_map(a),
        Command::Orbits(a) => commands::orbits(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Plot(a) => commands::plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
