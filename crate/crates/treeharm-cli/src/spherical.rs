//! Spherical-function table: one row per radius with the raw value and
//! the `q^(n/2)`-rescaled modulus that exposes the decay class.

use clap::Args;
use num_complex::Complex64;
use std::path::PathBuf;
use treeharm::{LatticeClass, SpectralParam, TreeParams};

use crate::output::{config_error, fmt_float, CmdResult, Csv};

#[derive(Args, Debug)]
pub struct SphericalArgs {
    /// Branching number (tree degree minus one), 2..=9
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    /// Real part of the spectral parameter
    #[arg(long, default_value_t = 0.0)]
    pub z_re: f64,
    /// Imaginary part of the spectral parameter
    #[arg(long, default_value_t = 0.0)]
    pub z_im: f64,
    /// Largest radius in the table
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    /// CSV destination (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &SphericalArgs) -> CmdResult {
    let params = match TreeParams::new(args.q) {
        Ok(params) => params,
        Err(err) => return config_error(err.to_string()),
    };
    if !args.z_re.is_finite() || !args.z_im.is_finite() {
        return config_error("spectral parameter must be finite");
    }
    let z = SpectralParam::new(params, Complex64::new(args.z_re, args.z_im));
    let degenerate = u8::from(z.lattice_class() != LatticeClass::Generic);
    let config = format!(
        "q={} z_re={} z_im={} depth={}",
        args.q,
        fmt_float(args.z_re),
        fmt_float(args.z_im),
        args.depth
    );
    let mut csv = Csv::new("spherical", &config, None, args.q, z.tau());
    csv.columns(&["n", "re_phi", "im_phi", "abs_phi_scaled", "degenerate"]);
    let sqrt_q = f64::from(args.q).sqrt();
    for n in 0..=args.depth {
        let phi = z.spherical(n);
        let scaled = phi.norm() * sqrt_q.powi(n as i32);
        csv.row(&[
            n.to_string(),
            fmt_float(phi.re),
            fmt_float(phi.im),
            fmt_float(scaled),
            degenerate.to_string(),
        ]);
    }
    csv.finish(args.out.as_deref())?;
    Ok(true)
}
