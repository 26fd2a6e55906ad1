//! Experiment harness for the `treeharm` library. Every subcommand echoes
//! its full configuration, writes CSV/JSON with fixed formatting, and is
//! byte-reproducible for a fixed seed regardless of thread count.
//!
//! Exit codes: 0 all checks pass, 1 a requested check failed, 2 usage or
//! configuration error, 3 numerical failure (degenerate system, calibration).

use clap::{Parser, Subcommand};
use std::process::ExitCode;

mod bmn;
mod eigen;
mod invert;
mod output;
mod restriction;
mod spherical;

#[derive(Parser)]
#[command(
    name = "treeharm",
    version,
    about = "Harmonic analysis experiments on homogeneous trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the elementary spherical function along a radius range
    Spherical(spherical::SphericalArgs),
    /// Sample restriction ratios of boundary transform slices
    Restriction(restriction::RestrictionArgs),
    /// Eigenfunction round trips and boundary-martingale recovery
    Eigen(eigen::EigenArgs),
    /// Difference-coefficient partial sums and their Cesàro means
    Bmn(bmn::BmnArgs),
    /// Calibration, inversion round trips, and spectral pairings
    #[command(alias = "plancherel")]
    Invert(invert::InvertArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spherical(args) => spherical::run(args),
        Command::Restriction(args) => restriction::run(args),
        Command::Eigen(args) => eigen::run(args),
        Command::Bmn(args) => bmn::run(args),
        Command::Invert(args) => invert::run(args),
    };
    output::exit_code(result)
}
