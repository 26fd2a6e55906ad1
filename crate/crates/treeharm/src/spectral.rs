//! The spectral side: eigenvalue map, c-function, spherical functions and
//! the Plancherel measure.
//!
//! Spectral parameters live on the torus of width `tau = 2 pi / log q`:
//! shifting `Re z` by `tau` changes nothing, so constructors reduce the
//! real part to `[-tau/2, tau/2)` once and for all. The Laplacian
//! eigenvalue attached to `z` is
//!
//! ```text
//! gamma(z) = (q^(1/2 + iz) + q^(1/2 - iz)) / (q + 1)
//! ```
//!
//! and the radial eigenfunction normalised to 1 at the root is the
//! spherical function `phi_z`. Away from the real half-lattice
//! `(tau/2) Z` it is a combination of two exponentials with c-function
//! coefficients; on the lattice the exponentials collide and a polynomial
//! correction (with an alternating sign on the shifted lattice) takes
//! over. All complex powers of `q` are evaluated as `exp(w log q)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tree::TreeParams;

/// Absolute tolerance for recognising lattice points of the torus.
pub const LATTICE_TOL: f64 = 1e-12;

/// `q^w` for complex `w`.
pub(crate) fn q_pow(params: TreeParams, w: Complex64) -> Complex64 {
    (w * (params.q() as f64).ln()).exp()
}

/// Where a spectral parameter sits relative to the degenerate lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeClass {
    /// Away from the real half-lattice; the generic two-exponential branch.
    Generic,
    /// Real and congruent to `0 (mod tau)`.
    TauMultiple,
    /// Real and congruent to `tau/2 (mod tau)`.
    HalfShifted,
}

/// A spectral parameter `z` over a fixed tree, with `Re z` reduced to the
/// fundamental torus interval `[-tau/2, tau/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam {
    params: TreeParams,
    z: Complex64,
}

impl SpectralParam {
    pub fn new(params: TreeParams, z: Complex64) -> Self {
        let tau = 2.0 * std::f64::consts::PI / (params.q() as f64).ln();
        let mut re = z.re - tau * (z.re / tau).round();
        if re >= tau / 2.0 {
            re -= tau;
        }
        SpectralParam {
            params,
            z: Complex64::new(re, z.im),
        }
    }

    /// Convenience constructor for real parameters.
    pub fn real(params: TreeParams, s: f64) -> Self {
        SpectralParam::new(params, Complex64::new(s, 0.0))
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    /// The reduced parameter.
    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// Torus width `2 pi / log q`.
    pub fn tau(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.params.q() as f64).ln()
    }

    fn on_half_lattice_re(&self) -> bool {
        let tau = self.tau();
        self.z.re.abs() <= LATTICE_TOL || (self.z.re.abs() - tau / 2.0).abs() <= LATTICE_TOL
    }

    /// Lattice classification of the reduced parameter (tolerance
    /// [`LATTICE_TOL`] in each coordinate).
    pub fn lattice_class(&self) -> LatticeClass {
        if self.z.im.abs() > LATTICE_TOL {
            return LatticeClass::Generic;
        }
        if self.z.re.abs() <= LATTICE_TOL {
            LatticeClass::TauMultiple
        } else if (self.z.re.abs() - self.tau() / 2.0).abs() <= LATTICE_TOL {
            LatticeClass::HalfShifted
        } else {
            LatticeClass::Generic
        }
    }

    /// True where the c-function has its poles: real parameters on the
    /// half-lattice `(tau/2) Z`.
    pub fn is_c_pole(&self) -> bool {
        self.lattice_class() != LatticeClass::Generic
    }

    /// True at the parameters `(k tau + i) / 2` where the eigenfunction /
    /// martingale correspondence degenerates (the Poisson kernel power
    /// becomes constant along levels there).
    pub fn is_recovery_pole(&self) -> bool {
        (self.z.im - 0.5).abs() <= LATTICE_TOL && self.on_half_lattice_re()
    }

    /// The Laplacian eigenvalue `gamma(z)`.
    pub fn eigenvalue(&self) -> Complex64 {
        let q = self.params.q() as f64;
        let i = Complex64::I;
        let a = q_pow(self.params, Complex64::new(0.5, 0.0) + i * self.z);
        let b = q_pow(self.params, Complex64::new(0.5, 0.0) - i * self.z);
        (a + b) / (q + 1.0)
    }

    /// The c-function
    /// `c(z) = (q^(1/2) / (q+1)) (q^(1/2+iz) - q^(-1/2-iz)) / (q^(iz) - q^(-iz))`,
    /// with poles on the real half-lattice.
    pub fn c_function(&self) -> Result<Complex64> {
        if self.is_c_pole() {
            return Err(Error::CFunctionPole { z: self.z });
        }
        let q = self.params.q() as f64;
        let i = Complex64::I;
        let num = q_pow(self.params, Complex64::new(0.5, 0.0) + i * self.z)
            - q_pow(self.params, Complex64::new(-0.5, 0.0) - i * self.z);
        let den = q_pow(self.params, i * self.z) - q_pow(self.params, -i * self.z);
        Ok(q.sqrt() / (q + 1.0) * num / den)
    }

    /// The spherical function `phi_z(n)` — the radial Laplacian
    /// eigenfunction for `gamma(z)` with `phi_z(0) = 1` — as a function of
    /// the distance `n` from the root.
    pub fn spherical(&self, n: usize) -> Complex64 {
        let q = self.params.q() as f64;
        let nf = n as f64;
        match self.lattice_class() {
            LatticeClass::Generic => {
                let c_plus = self.c_function().expect("generic parameter");
                // c(z) + c(-z) = 1 identically, so reuse the one evaluation
                let c_minus = Complex64::ONE - c_plus;
                let i = Complex64::I;
                let half = Complex64::new(0.5, 0.0);
                c_plus * q_pow(self.params, (i * self.z - half) * nf)
                    + c_minus * q_pow(self.params, (-i * self.z - half) * nf)
            }
            LatticeClass::TauMultiple => {
                Complex64::new(((q - 1.0) / (q + 1.0) * nf + 1.0) * q.powf(-nf / 2.0), 0.0)
            }
            LatticeClass::HalfShifted => {
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                Complex64::new(
                    sign * ((q - 1.0) / (q + 1.0) * nf + 1.0) * q.powf(-nf / 2.0),
                    0.0,
                )
            }
        }
    }
}

/// `delta_p = 1/p - 1/2` for `p` in `[1, inf]` (pass `f64::INFINITY` for
/// the endpoint).
pub fn delta_exponent(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent {
            value: p,
            expected: "[1, inf]",
        });
    }
    Ok(if p.is_infinite() { -0.5 } else { 1.0 / p - 0.5 })
}

/// Conjugate exponent: `1/p + 1/p' = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// The closed strip `S_p = { |Im z| <= |delta_p| }` where the `L^p`
/// mapping theory of the Poisson transform lives.
#[derive(Debug, Clone, Copy)]
pub struct Strip {
    half_width: f64,
}

impl Strip {
    pub fn new(p: f64) -> Result<Self> {
        Ok(Strip {
            half_width: delta_exponent(p)?.abs(),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.im.abs() <= self.half_width + LATTICE_TOL
    }

    pub fn interior_contains(&self, z: Complex64) -> bool {
        z.im.abs() < self.half_width - LATTICE_TOL
    }
}

/// The Plancherel measure `d mu(s) = C_G |c(s)|^{-2} ds` on the torus,
/// with the constant calibrated so the measure has total mass 1.
#[derive(Debug, Clone, Copy)]
pub struct PlancherelMeasure {
    params: TreeParams,
    c_g: f64,
    calibration_grid: usize,
}

impl PlancherelMeasure {
    /// Calibrate `C_G` by integrating `|c(s)|^{-2}` with the periodic
    /// midpoint rule, doubling the grid until two consecutive results agree
    /// to `1e-12` (relative).
    pub fn calibrate(params: TreeParams) -> Result<Self> {
        let mut m = 64usize;
        let mut previous = raw_density_integral(params, m);
        loop {
            m *= 2;
            let current = raw_density_integral(params, m);
            if (current - previous).abs() <= 1e-12 * current.abs().max(1.0) {
                return Ok(PlancherelMeasure {
                    params,
                    c_g: 1.0 / current,
                    calibration_grid: m,
                });
            }
            if m >= (1 << 22) {
                return Err(Error::CalibrationFailed {
                    detail: format!(
                        "integral still moving by {:.3e} at grid size {m}",
                        (current - previous).abs()
                    ),
                });
            }
            previous = current;
        }
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    /// The calibrated normalisation constant.
    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    /// Grid size at which the calibration integral stabilised.
    pub fn calibration_grid(&self) -> usize {
        self.calibration_grid
    }

    /// Density `C_G |c(s)|^{-2}` at a real parameter; the removable zeros
    /// on the half-lattice are filled with their limit 0.
    pub fn density(&self, s: f64) -> f64 {
        let sp = SpectralParam::real(self.params, s);
        match sp.c_function() {
            Ok(c) => self.c_g / c.norm_sqr(),
            Err(_) => 0.0,
        }
    }

    /// A quadrature grid of `m` midpoint-shifted nodes covering the torus
    /// once. Node `j` is `-tau/2 + (j + 1/2) tau / m`; the shift keeps all
    /// nodes away from the half-lattice. `m` must be even (so nodes come in
    /// `+/- s` pairs) and at least 2.
    pub fn grid(&self, m: usize) -> Result<SpectralGrid> {
        if m < 2 {
            return Err(Error::InvalidGrid {
                m,
                reason: "need at least two nodes",
            });
        }
        if !m.is_multiple_of(2) {
            return Err(Error::InvalidGrid {
                m,
                reason: "node count must be even",
            });
        }
        let tau = SpectralParam::real(self.params, 0.0).tau();
        let step = tau / m as f64;
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for j in 0..m {
            let s = -tau / 2.0 + (j as f64 + 0.5) * step;
            nodes.push(s);
            weights.push(self.density(s) * step);
        }
        Ok(SpectralGrid { nodes, weights })
    }
}

fn raw_density_integral(params: TreeParams, m: usize) -> f64 {
    let tau = SpectralParam::real(params, 0.0).tau();
    let step = tau / m as f64;
    let mut total = 0.0;
    for j in 0..m {
        let s = -tau / 2.0 + (j as f64 + 0.5) * step;
        let c = SpectralParam::real(params, s)
            .c_function()
            .expect("midpoint nodes avoid the lattice");
        total += c.norm_sqr().recip();
    }
    total * step
}

/// Nodes and Plancherel weights of one torus quadrature grid.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total Plancherel mass carried by the grid; close to 1 for any
    /// reasonable size.
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}
