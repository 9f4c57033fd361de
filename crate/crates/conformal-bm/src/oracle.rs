//! Closed-form exit densities, expected exit times, and Green's functions.
//!
//! Everything here is an exact reference the stochastic side is tested
//! against. Densities are per unit arclength; Green's functions carry the
//! `1/pi` normalization that goes with per-coordinate-variance-`t` Brownian
//! motion (`E|B_t|^2 = 2t`). Analysis texts differ from this by factors of
//! `2 pi`; comparisons against tables should check the normalization first.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Exit density of the unit disk started from `a`, at the boundary point
/// `e^{i theta}`, per unit arclength:
///
/// ```text
/// (1/2pi) (1 - |a|^2) / |1 - conj(a) e^{i theta}|^2
/// ```
pub fn poisson_disk(a: Complex64, theta: f64) -> Result<f64> {
    if !(a.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "start point must lie in the open unit disk, got |a| = {}",
            a.norm()
        )));
    }
    let w = Complex64::from_polar(1.0, theta);
    Ok((1.0 - a.norm_sqr()) / (2.0 * PI * (1.0 - a.conj() * w).norm_sqr()))
}

/// Exit density of the upper half-plane started from `iv`, at the real point
/// `x`: the Cauchy law `(1/pi) v / (v^2 + x^2)`.
pub fn cauchy_halfplane(v: f64, x: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("start height must be positive, got {v}")));
    }
    Ok(v / (PI * (v * v + x * x)))
}

/// Density of the exit point of the half-plane bounded by the vertical line
/// `{Re = r}`, started from `a`, evaluated at the nearest boundary point
/// (the point of the line at height `Im a`): `1 / (pi |r - Re a|)`.
///
/// Shifting `a` vertically shifts the whole exit law with it, so only the
/// horizontal distance enters.
pub fn cauchy_shifted(a: Complex64, r: f64) -> Result<f64> {
    let d = (r - a.re).abs();
    if d == 0.0 {
        return Err(Error::Domain(format!(
            "start point {a} lies on the boundary line Re = {r}"
        )));
    }
    Ok(1.0 / (PI * d))
}

/// Exit density of the punctured unit disk started from `a` on `(0,1)`, at
/// the boundary point `e^{i theta}`, as the wrapped-Cauchy partial sum
///
/// ```text
/// sum over |k| <= n of (-ln a) / (pi ((ln a)^2 + (theta + 2 pi k)^2))
/// ```
///
/// Terms are added in symmetric pairs from `k = n` inward (smallest first)
/// with the `k = 0` term last. Converges to [`poisson_disk`]`(a, theta)` as
/// `n` grows; [`punctured_disk_exit_tail_bound`] bounds the gap.
pub fn punctured_disk_exit_series(a: f64, theta: f64, n: usize) -> Result<f64> {
    check_unit_interval(a)?;
    let l = -a.ln();
    let term = |t: f64| l / (PI * (l * l + t * t));
    let mut sum = 0.0;
    for k in (1..=n).rev() {
        let shift = 2.0 * PI * k as f64;
        sum += term(theta + shift) + term(theta - shift);
    }
    Ok(sum + term(theta))
}

/// Upper bound on `poisson_disk(a, theta) - punctured_disk_exit_series(a,
/// theta, n)`, by integral comparison of the omitted terms:
///
/// ```text
/// (-ln a) / (pi^2 (2n - |theta|/pi))
/// ```
///
/// Exposed so callers can pick `n` from a target accuracy. Requires
/// `2n > |theta|/pi` (the truncation must clear the evaluation angle).
pub fn punctured_disk_exit_tail_bound(a: f64, theta: f64, n: usize) -> Result<f64> {
    check_unit_interval(a)?;
    let denom = 2.0 * n as f64 - theta.abs() / PI;
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "tail bound needs 2n > |theta|/pi, got n = {n}, theta = {theta}"
        )));
    }
    Ok(-a.ln() / (PI * PI * denom))
}

/// Exit density of the strip `{|Re z| < 1}` started from the real point `a`,
/// at the boundary point `1`:
///
/// ```text
/// (1 + tan(pi a / 4)) / (4 (1 - tan(pi a / 4)))
/// ```
///
/// Monotone increasing in `a`, blowing up as `a` approaches the boundary.
pub fn strip_exit_density_closed(a: f64) -> Result<f64> {
    if !(a > -1.0 && a < 1.0) {
        return Err(Error::Domain(format!(
            "start must lie in (-1, 1), got {a}"
        )));
    }
    let t = (PI / 4.0 * a).tan();
    Ok((1.0 + t) / (4.0 * (1.0 - t)))
}

/// Expected exit time of the strip `{|Re z| < h}` started from the real
/// point `a`: the martingale `Re(B)^2 - t` gives `E_a[tau] = h^2 - a^2`.
pub fn expected_exit_time_strip(half_width: f64, a: f64) -> Result<f64> {
    if !(half_width > 0.0) || !(a.abs() < half_width) {
        return Err(Error::Domain(format!(
            "need |a| < h with h > 0, got h = {half_width}, a = {a}"
        )));
    }
    Ok(half_width * half_width - a * a)
}

const SINGULARITY_TOL: f64 = 1e-14;

/// Green's function of the upper half-plane,
/// `(1/pi) ln(|a - conj(z)| / |a - z|)`.
pub fn greens_halfplane(a: Complex64, z: Complex64) -> Result<f64> {
    if !(a.im > 0.0) || !(z.im > 0.0) {
        return Err(Error::Domain(format!(
            "both points must lie in the upper half-plane, got {a}, {z}"
        )));
    }
    if (a - z).norm() < SINGULARITY_TOL {
        return Err(Error::Singularity);
    }
    Ok(((a - z.conj()).norm() / (a - z).norm()).ln() / PI)
}

/// Green's function of the unit disk,
/// `(1/pi) ln(|1 - conj(a) z| / |z - a|)`.
pub fn greens_disk(a: Complex64, z: Complex64) -> Result<f64> {
    if !(a.norm() < 1.0) || !(z.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "both points must lie in the open unit disk, got {a}, {z}"
        )));
    }
    if (a - z).norm() < SINGULARITY_TOL {
        return Err(Error::Singularity);
    }
    Ok(((1.0 - a.conj() * z).norm() / (z - a).norm()).ln() / PI)
}

/// A Green's function on one of the cataloged domains, bundled with its pole.
///
/// The punctured-disk variant evaluates the reflection series
///
/// ```text
/// (1/2pi) [ ln T(0) + 2 sum_{n=1..N} ln T(n) ],
/// T(n) = ((2 pi n)^2 + (alpha+gamma)^2) / ((2 pi n)^2 + (alpha-gamma)^2)
/// ```
///
/// with `alpha = -ln(pole)`, `gamma = -ln z`, valid for pole and `z` on the
/// positive real axis inside the disk. It converges to [`greens_disk`] at the
/// same points, which is the identity behind the product formula for sinh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreensFunction {
    HalfPlaneUpper { pole: Complex64 },
    Disk { pole: Complex64 },
    PuncturedDiskSeries { pole: f64, truncation: usize },
}

impl GreensFunction {
    pub fn eval(&self, z: Complex64) -> Result<f64> {
        match *self {
            GreensFunction::HalfPlaneUpper { pole } => greens_halfplane(pole, z),
            GreensFunction::Disk { pole } => greens_disk(pole, z),
            GreensFunction::PuncturedDiskSeries { pole, truncation } => {
                check_unit_interval(pole)?;
                if z.im.abs() > SINGULARITY_TOL {
                    return Err(Error::Domain(format!(
                        "the series form is defined on the positive real axis, got {z}"
                    )));
                }
                check_unit_interval(z.re)?;
                if (z.re - pole).abs() < SINGULARITY_TOL {
                    return Err(Error::Singularity);
                }
                let (alpha, gamma) = (-pole.ln(), -z.re.ln());
                let (sp, sm) = ((alpha + gamma).powi(2), (alpha - gamma).powi(2));
                // ln T(n) summed smallest-first; ln_1p keeps the n >> 1 terms
                // from losing their low bits.
                let mut sum = 0.0;
                for n in (1..=truncation).rev() {
                    let q = (2.0 * PI * n as f64).powi(2);
                    sum += 2.0 * ((sp - sm) / (q + sm)).ln_1p();
                }
                Ok((sum + (sp / sm).ln()) / (2.0 * PI))
            }
        }
    }
}

fn check_unit_interval(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("expected a value in (0, 1), got {a}")))
    }
}
