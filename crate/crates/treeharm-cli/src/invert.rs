//! Spectral calibration and transform round trips: calibrate the plancherel
//! constant, check the grid's total mass, invert the transform of a handful
//! of random functions, and pair random functions through the spectral side.

use clap::Args;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use treeharm::{invert, parseval, PlancherelMeasure, TreeFunction, TreeParams};

use crate::output::{config_error, write_report, CmdResult};

#[derive(Args, Debug)]
pub struct InvertArgs {
    /// Branching number, 2..=9
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    /// Master seed for the random test functions
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spectral grid size (power of two)
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    /// Support radius of the random test functions
    #[arg(long, default_value_t = 4)]
    pub support_radius: usize,
    /// Number of random pairs for the isometry check
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// JSON report destination (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reflect the tolerances in the exit code
    #[arg(long, default_value_t = false)]
    pub check: bool,
}

const WEIGHT_SUM_TOL: f64 = 1e-10;
const INVERSION_TOL: f64 = 1e-8;
const PARSEVAL_TOL: f64 = 1e-8;
/// Inversion round trips beyond the deterministic delta probe.
const INVERSION_SAMPLES: usize = 3;

#[derive(Serialize)]
struct Report {
    command: &'static str,
    q: u32,
    seed: u64,
    grid: usize,
    support_radius: usize,
    samples: usize,
    normalisation_constant: f64,
    calibration_grid: usize,
    weight_sum: f64,
    weight_sum_error: f64,
    max_inversion_error: f64,
    grid_warning: bool,
    max_parseval_relative_residual: f64,
    weight_sum_ok: bool,
    inversion_ok: bool,
    parseval_ok: bool,
    pass: bool,
}

fn gaussian_fn(params: TreeParams, radius: usize, seed: u64, stream: u64) -> TreeFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    TreeFunction::from_fn(params, radius, |_| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
    .expect("radius validated against the depth budget")
}

pub fn run(args: &InvertArgs) -> CmdResult {
    let params = match TreeParams::new(args.q) {
        Ok(params) => params,
        Err(err) => return config_error(err.to_string()),
    };
    if params.checked_sphere_len(args.support_radius).is_err() {
        return config_error(format!(
            "support radius {} exceeds the depth budget for q = {}",
            args.support_radius, args.q
        ));
    }
    if args.grid < 2 || !args.grid.is_power_of_two() {
        return config_error(format!(
            "--grid must be a power of two, at least 2, got {}",
            args.grid
        ));
    }

    let measure = PlancherelMeasure::calibrate(params)?;
    let grid = measure.grid(args.grid)?;
    let weight_sum: f64 = grid.weights().iter().sum();
    let weight_sum_error = (weight_sum - 1.0).abs();

    // round trips: the delta at the root, then coupled random functions
    let mut max_inversion_error = 0.0f64;
    let mut grid_warning = false;
    let delta = TreeFunction::delta(params, &treeharm::Vertex::root())?;
    for f in std::iter::once(delta).chain(
        (0..INVERSION_SAMPLES)
            .map(|k| gaussian_fn(params, args.support_radius, args.seed, k as u64 + 1)),
    ) {
        let report = invert(&f, &measure, args.grid)?;
        max_inversion_error = max_inversion_error.max(report.max_abs_error);
        grid_warning |= report.grid_warning;
    }

    // spectral pairing against the exact vertex pairing, relative to the
    // geometric mean of the energies
    let residuals: Result<Vec<f64>, treeharm::Error> = (0..args.samples)
        .into_par_iter()
        .map(|index| {
            let f1 = gaussian_fn(params, args.support_radius, args.seed, 1001 + index as u64);
            let f2 = gaussian_fn(params, args.support_radius, args.seed, 2001 + index as u64);
            let report = parseval(&f1, &f2, &measure, args.grid)?;
            let scale = (f1.norm_sq() * f2.norm_sq()).sqrt().max(f64::MIN_POSITIVE);
            Ok(report.residual / scale)
        })
        .collect();
    let max_parseval_relative_residual = residuals?.into_iter().fold(0.0f64, f64::max);

    let weight_sum_ok = weight_sum_error <= WEIGHT_SUM_TOL;
    let inversion_ok = max_inversion_error < INVERSION_TOL;
    let parseval_ok = max_parseval_relative_residual < PARSEVAL_TOL;
    let pass = weight_sum_ok && inversion_ok && parseval_ok;
    let report = Report {
        command: "invert",
        q: args.q,
        seed: args.seed,
        grid: args.grid,
        support_radius: args.support_radius,
        samples: args.samples,
        normalisation_constant: measure.c_g(),
        calibration_grid: measure.calibration_grid(),
        weight_sum,
        weight_sum_error,
        max_inversion_error,
        grid_warning,
        max_parseval_relative_residual,
        weight_sum_ok,
        inversion_ok,
        parseval_ok,
        pass,
    };
    write_report(args.out.as_ref(), &report)?;
    Ok(!args.check || pass)
}
