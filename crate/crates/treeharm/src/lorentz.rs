//! Lorentz norms for functions on finite vertex sets with counting
//! measure.
//!
//! For a finite function with decreasing rearrangement `a_1 >= a_2 >= ...`
//! the `(p, r)` norm is
//!
//! ```text
//! ( sum_k a_k^r (k^(r/p) - (k-1)^(r/p)) )^(1/r)      for r < inf
//! max_k k^(1/p) a_k                                   for r = inf
//! ```
//!
//! The first line is the exact value of the usual integral definition
//! `(r/p int_0^inf (t^(1/p) f*(t))^r dt/t)^(1/r)` for a step-function
//! rearrangement, prefactor included. With this normalisation the norms
//! are monotone in the second index (`r1 <= r2` implies the `r2` norm is
//! no larger), every `(p, p)` norm is the plain `l^p` norm, and all
//! indicator functions of `k` points have norm exactly `k^(1/p)`
//! regardless of `r`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `k^alpha - (k-1)^alpha` without the cancellation of the naive
/// difference (the two terms agree to ~`alpha/k` relative).
fn power_increment(k: usize, alpha: f64) -> f64 {
    if k == 1 {
        return 1.0;
    }
    if alpha == 1.0 {
        return 1.0;
    }
    let kf = k as f64;
    -kf.powf(alpha) * f64::exp_m1(alpha * f64::ln_1p(-1.0 / kf))
}

fn validate_exponent(value: f64, role: &'static str) -> Result<()> {
    if value.is_nan() || value < 1.0 {
        return Err(Error::InvalidExponent {
            value,
            expected: role,
        });
    }
    Ok(())
}

/// Lorentz `(p, r)` norm of a finite complex-valued function, listed in
/// any order. Both exponents range over `[1, inf]`.
pub fn lorentz_norm(p: f64, r: f64, values: &[Complex64]) -> Result<f64> {
    let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    lorentz_norm_of_moduli(p, r, &mags)
}

/// Lorentz `(p, r)` norm from precomputed magnitudes (must be finite and
/// nonnegative).
pub fn lorentz_norm_of_moduli(p: f64, r: f64, magnitudes: &[f64]) -> Result<f64> {
    validate_exponent(p, "first Lorentz index in [1, inf]")?;
    validate_exponent(r, "second Lorentz index in [1, inf]")?;
    let mut mags = Vec::with_capacity(magnitudes.len());
    for &m in magnitudes {
        if !m.is_finite() || m < 0.0 {
            return Err(Error::InvalidData(format!(
                "magnitude {m} is not a finite nonnegative number"
            )));
        }
        mags.push(m);
    }
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    while mags.last() == Some(&0.0) {
        mags.pop();
    }
    if mags.is_empty() {
        return Ok(0.0);
    }
    if r.is_infinite() {
        let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
        let mut best = 0.0f64;
        for (k, &a) in mags.iter().enumerate() {
            best = best.max(((k + 1) as f64).powf(inv_p) * a);
        }
        return Ok(best);
    }
    let alpha = if p.is_infinite() { 0.0 } else { r / p };
    let mut total = 0.0;
    for (k, &a) in mags.iter().enumerate() {
        total += a.powf(r) * power_increment(k + 1, alpha);
    }
    Ok(total.powf(1.0 / r))
}

/// Plain `l^p` norm (`p` in `[1, inf]`) of a finite complex-valued
/// function under counting measure.
pub fn lp_norm(p: f64, values: &[Complex64]) -> Result<f64> {
    validate_exponent(p, "exponent in [1, inf]")?;
    if p.is_infinite() {
        return Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let total: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
    Ok(total.powf(1.0 / p))
}

/// Ball-restricted norm statistics of a vertex function at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormGrowthRow {
    /// Ball radius the row was computed on.
    pub radius: usize,
    /// Weak norm `max_k k^(1/p) a_k` over the ball.
    pub weak: f64,
    /// Plain `l^p` norm over the ball.
    pub lp: f64,
    /// `(1/radius) * sum_ball |u|^p` (the averaged power sum that the
    /// weak norm controls up to a logarithmic factor).
    pub mean_power: f64,
}

/// Table of ball-restricted `(p, inf)` and `(p, p)` norms and averaged
/// `p`-th power sums of `u` over `B(o, N)` for each requested radius.
/// Whether the statistics settle or keep climbing as the radius grows is
/// exactly what separates the spectral parameters whose eigenfunctions
/// lie in (weak) `l^p` from those whose eigenfunctions do not.
pub fn weak_norm_growth(
    u: &crate::treefn::TreeFunction,
    p: f64,
    radii: &[usize],
) -> Result<Vec<NormGrowthRow>> {
    validate_exponent(p, "first Lorentz index in [1, inf]")?;
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        if radius == 0 || radius > u.radius() {
            return Err(Error::DomainTooSmall {
                needed: radius,
                have: u.radius(),
            });
        }
        let mags: Vec<f64> = (0..=radius)
            .flat_map(|n| u.level(n).iter().map(|v| v.norm()))
            .collect();
        let weak = lorentz_norm_of_moduli(p, f64::INFINITY, &mags)?;
        let lp = lorentz_norm_of_moduli(p, p, &mags)?;
        let mean_power = if p.is_infinite() {
            mags.iter().fold(0.0f64, |a, &b| a.max(b)) / radius as f64
        } else {
            mags.iter().map(|m| m.powf(p)).sum::<f64>() / radius as f64
        };
        rows.push(NormGrowthRow {
            radius,
            weak,
            lp,
            mean_power,
        });
    }
    Ok(rows)
}
