//! Series, product, and power-series evaluators for the exit-law identities,
//! each with an explicit truncation contract.
//!
//! Four independent routes to `pi^2/6` live here:
//!
//! 1. odd reciprocal squares via [`odd_square_sum`] and [`basel_from_odd`],
//! 2. the wrapped-Cauchy route via [`basel_from_wrapping`],
//! 3. the reflection series and its term derivative,
//! 4. the product route via [`sinh_product`] / [`basel_from_product`].
//!
//! Tail-bound functions are part of the public contract: callers pick a
//! truncation from a target accuracy instead of guessing. All evaluators are
//! pure and, at fixed truncation, bit-reproducible.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::map::ConformalMap;
use crate::oracle;
use crate::{Error, Result};

/// Leading power-series coefficients `a_0..a_N` of an analytic map.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeriesCoeffs {
    coeffs: Vec<Complex64>,
}

impl PowerSeriesCoeffs {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite coefficient {bad}")));
        }
        Ok(PowerSeriesCoeffs { coeffs })
    }

    /// Coefficients of the principal arctangent through degree `n_max`.
    pub fn arctan(n_max: usize) -> Self {
        let coeffs = (0..=n_max)
            .map(|n| {
                let c = if n >= 1 { arctan_coeff(n).unwrap() } else { 0.0 };
                Complex64::new(c, 0.0)
            })
            .collect();
        PowerSeriesCoeffs { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Degree bound: coefficients run from `a_0` to `a_{len-1}`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// How many terms a series evaluator may spend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMode {
    FixedN(usize),
    /// Target absolute accuracy; the truncation is chosen from a tail bound.
    TailBound(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub mode: TruncationMode,
    pub max_terms: usize,
}

impl TruncationPolicy {
    pub fn fixed(n: usize) -> Self {
        TruncationPolicy { mode: TruncationMode::FixedN(n), max_terms: n }
    }

    pub fn tail_bound(eps: f64, max_terms: usize) -> Self {
        TruncationPolicy { mode: TruncationMode::TailBound(eps), max_terms }
    }

    /// The truncation to run at: `FixedN` passes through, `TailBound` picks
    /// the smallest `n <= max_terms` with `bound(n) <= eps` by bisection
    /// (`bound` must be nonincreasing in `n`).
    pub fn resolve<F: Fn(usize) -> f64>(&self, bound: F) -> Result<usize> {
        match self.mode {
            TruncationMode::FixedN(n) => {
                if n < 1 {
                    Err(Error::Domain("truncation must be at least 1".into()))
                } else if n > self.max_terms {
                    Err(Error::Domain(format!(
                        "truncation {n} exceeds the term budget {}",
                        self.max_terms
                    )))
                } else {
                    Ok(n)
                }
            }
            TruncationMode::TailBound(eps) => {
                if !(eps > 0.0) {
                    return Err(Error::Domain(format!(
                        "accuracy target must be positive, got {eps}"
                    )));
                }
                if bound(self.max_terms) > eps {
                    return Err(Error::Domain(format!(
                        "accuracy {eps} unreachable within {} terms (bound there: {})",
                        self.max_terms,
                        bound(self.max_terms)
                    )));
                }
                let (mut lo, mut hi) = (1usize, self.max_terms);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if bound(mid) <= eps {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                Ok(lo)
            }
        }
    }
}

/// Expected exit time of the image of the unit disk under a map with these
/// series coefficients, started at the image of the center:
/// `1/2 sum_{n>=1} |a_n|^2`. Monotone in the number of supplied terms.
pub fn exit_time_from_coeffs(c: &PowerSeriesCoeffs) -> f64 {
    let sum: f64 = c.coeffs.iter().skip(1).rev().map(|a| a.norm_sqr()).sum();
    0.5 * sum
}

/// `n`-th Maclaurin coefficient of the principal arctangent:
/// `0` for even `n`, `(-1)^((n-1)/2) / n` for odd `n`.
pub fn arctan_coeff(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("coefficient index must be at least 1".into()));
    }
    if n % 2 == 0 {
        Ok(0.0)
    } else {
        let sign = if ((n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign / n as f64)
    }
}

/// Numerical Cauchy coefficient: the trapezoid approximation of
/// `(1/(2 pi r^n)) \int_0^{2pi} f(r e^{i t}) e^{-i n t} dt`
/// with `q` nodes. Spectrally accurate when `f` is analytic past radius `r`;
/// requires `q >= 4n` so the aliasing error sits far down the tail.
pub fn coeff_extract(m: &ConformalMap, n: usize, r: f64, q: usize) -> Result<Complex64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("radius must lie in (0, 1), got {r}")));
    }
    if q < 4 * n.max(1) {
        return Err(Error::Domain(format!("need at least {} nodes for degree {n}, got {q}", 4 * n.max(1))));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..q {
        let t = 2.0 * PI * j as f64 / q as f64;
        let z = Complex64::from_polar(r, t);
        sum += m.eval(z)? * Complex64::from_polar(1.0, -(n as f64) * t);
    }
    Ok(sum / (q as f64 * r.powi(n as i32)))
}

/// Partial sum of the odd reciprocal squares, `sum_{j=1..n} 1/(2j-1)^2`,
/// accumulated smallest-first. Tends to `pi^2/8`.
pub fn odd_square_sum(n: usize) -> f64 {
    let mut sum = 0.0;
    for j in (1..=n).rev() {
        let d = (2 * j - 1) as f64;
        sum += 1.0 / (d * d);
    }
    sum
}

/// Tail of [`odd_square_sum`]: `sum_{j>n} 1/(2j-1)^2 <= 1/(2(2n-1))`.
pub fn odd_square_tail_bound(n: usize) -> f64 {
    1.0 / (2.0 * (2.0 * n as f64 - 1.0))
}

/// Recover the full reciprocal-square sum from the odd one: the even terms
/// are a quarter of the whole, so the whole is `4/3` of the odd part.
pub fn basel_from_odd(s: f64) -> f64 {
    4.0 / 3.0 * s
}

/// `|punctured_disk_exit_series(a, theta, n) - poisson_disk(a, theta)|`,
/// the gap the wrapped-Cauchy identity closes as `n` grows.
pub fn wrapped_sum_identity_gap(a: f64, theta: f64, n: usize) -> Result<f64> {
    let series = oracle::punctured_disk_exit_series(a, theta, n)?;
    let closed = oracle::poisson_disk(Complex64::new(a, 0.0), theta)?;
    Ok((series - closed).abs())
}

/// Symmetric partial sum of `sum_k 1/(theta + 2 pi k)^2` over `|k| <= n`.
/// Tends to `1/(2(1 - cos theta))`.
pub fn cosec_identity_lhs(theta: f64, n: usize) -> Result<f64> {
    check_not_full_turn(theta)?;
    let mut sum = 0.0;
    for k in (1..=n).rev() {
        let shift = 2.0 * PI * k as f64;
        sum += 1.0 / (theta + shift).powi(2) + 1.0 / (theta - shift).powi(2);
    }
    Ok(sum + 1.0 / (theta * theta))
}

/// The closed form the partial sums of [`cosec_identity_lhs`] approach.
pub fn cosec_identity_rhs(theta: f64) -> Result<f64> {
    check_not_full_turn(theta)?;
    // 2 (1 - cos t) = 4 sin^2(t/2): same value, no cancellation near 0.
    let s = (theta / 2.0).sin();
    Ok(1.0 / (4.0 * s * s))
}

/// Tail of [`cosec_identity_lhs`] by integral comparison:
/// `(1/2pi) (1/(2 pi n + theta) + 1/(2 pi n - theta))`. Needs `2 pi n > |theta|`.
pub fn cosec_tail_bound(theta: f64, n: usize) -> Result<f64> {
    let shift = 2.0 * PI * n as f64;
    if shift <= theta.abs() {
        return Err(Error::Domain(format!(
            "tail bound needs 2 pi n > |theta|, got n = {n}, theta = {theta}"
        )));
    }
    Ok((1.0 / (shift + theta) + 1.0 / (shift - theta)) / (2.0 * PI))
}

/// `1/(2(1 - cos theta)) - 1/theta^2`, evaluated without catastrophic
/// cancellation: below `|theta| = 1e-3` the closed form loses ~10 digits to
/// the pole, so a 4-term Taylor expansion (error < 1e-16 there) takes over.
/// Continuous at 0 with value `1/12`.
pub fn cosec_minus_pole(theta: f64) -> f64 {
    let t2 = theta * theta;
    if theta.abs() < 1e-3 {
        1.0 / 12.0 + t2 / 240.0 + t2 * t2 / 6048.0 + t2 * t2 * t2 / 172_800.0
    } else {
        let s = (theta / 2.0).sin();
        1.0 / (4.0 * s * s) - 1.0 / t2
    }
}

/// The limit of [`cosec_minus_pole`] at 0: exactly `1/12`.
pub fn theta_limit_value() -> f64 {
    1.0 / 12.0
}

/// `sum_{k != 0, |k| <= n} 1/(theta + 2 pi k)^2`: the wrapped sum with its
/// pole term removed. At `theta = 0` this tends to `1/12`, which is the
/// wrapped-route engine behind [`basel_from_wrapping`]. Requires
/// `|theta| <= pi` so no denominator can vanish.
pub fn wrapped_nonzero_sum(theta: f64, n: usize) -> Result<f64> {
    if !(theta.abs() <= PI) {
        return Err(Error::Domain(format!(
            "the wrapped sum is meant for |theta| <= pi, got {theta}"
        )));
    }
    let mut sum = 0.0;
    for k in (1..=n).rev() {
        let shift = 2.0 * PI * k as f64;
        sum += 1.0 / (theta + shift).powi(2) + 1.0 / (theta - shift).powi(2);
    }
    Ok(sum)
}

/// Tail of [`wrapped_nonzero_sum`] at `theta = 0`: `1/(2 pi^2 n)`.
pub fn wrapped_nonzero_tail_bound(n: usize) -> f64 {
    1.0 / (2.0 * PI * PI * n as f64)
}

/// The wrapped route to the reciprocal-square sum: rescale
/// [`wrapped_nonzero_sum`] by `2 pi^2`, which at `theta = 0` is literally
/// `sum_{k=1..n} 1/k^2`. Tends to `pi^2/6`; the absolute tail at
/// `theta = 0` is bounded by `1/n`.
pub fn basel_from_wrapping(n: usize, theta_small: f64) -> Result<f64> {
    Ok(2.0 * PI * PI * wrapped_nonzero_sum(theta_small, n)?)
}

/// Tail of [`basel_from_wrapping`] at `theta = 0`: `1/n`.
pub fn basel_wrapping_tail_bound(n: usize) -> f64 {
    1.0 / n as f64
}

/// The reflection expansion of the strip exit density at the boundary
/// point 1:
///
/// ```text
/// (1/pi) ( 1/(1-a) - 1/(3+a) + 1/(5-a) - 1/(7+a) + ... ), n terms
/// ```
///
/// summed strictly in this order. The series is conditionally convergent and
/// the alternating structure IS the convergence argument, so no reordering
/// or pairing is permitted; consecutive partial sums bracket the limit
/// `strip_exit_density_closed(a)`.
pub fn reflection_series(a: f64, n: usize) -> Result<f64> {
    check_strip_start(a)?;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=n {
        let d = (2 * j - 1) as f64 + sign * (-a);
        sum += sign / d;
        sign = -sign;
    }
    Ok(sum / PI)
}

/// [`reflection_series`] run until consecutive partial sums bracket the limit
/// to better than `width` on the returned scale (after the `1/pi`), returning
/// the midpoint of the final bracket; its error is below `width / 2`.
pub fn reflection_series_bracketed(a: f64, width: f64, max_terms: u64) -> Result<f64> {
    check_strip_start(a)?;
    if !(width > 0.0) {
        return Err(Error::Domain(format!("bracket width must be positive, got {width}")));
    }
    // Terms carry the 1/pi only at the end, so the stop threshold moves the
    // other way.
    let raw_width = width * PI;
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut j: u64 = 1;
    loop {
        let d = (2 * j - 1) as f64 + sign * (-a);
        let term = sign / d;
        let prev = sum;
        sum += term;
        if term.abs() < raw_width {
            return Ok((sum + prev) / (2.0 * PI));
        }
        if j >= max_terms {
            return Err(Error::InsufficientData {
                needed: j as usize + 1,
                got: j as usize,
            });
        }
        sign = -sign;
        j += 1;
    }
}

/// Term-by-term derivative of `pi` times [`reflection_series`]: all terms
/// positive,
///
/// ```text
/// sum_{j=1..n} 1 / ((2j-1) + (-1)^j a)^2,
/// ```
///
/// which at `a = 0` is exactly [`odd_square_sum`]. Tends to
/// [`reflection_derivative_closed`].
pub fn reflection_series_derivative(a: f64, n: usize) -> Result<f64> {
    check_strip_start(a)?;
    let mut sum = 0.0;
    for j in (1..=n).rev() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let d = (2 * j - 1) as f64 + sign * a;
        sum += 1.0 / (d * d);
    }
    Ok(sum)
}

/// Closed form of the derivative series' limit:
/// `(pi^2/8) sec^2(pi a/4) / (1 - tan(pi a/4))^2`.
pub fn reflection_derivative_closed(a: f64) -> Result<f64> {
    check_strip_start(a)?;
    let u = PI / 4.0 * a;
    let sec2 = 1.0 / (u.cos() * u.cos());
    Ok(PI * PI / 8.0 * sec2 / (1.0 - u.tan()).powi(2))
}

/// Tail of [`reflection_series_derivative`]: `1/(2(2n - 1 - |a|))`.
pub fn reflection_derivative_tail_bound(a: f64, n: usize) -> f64 {
    1.0 / (2.0 * (2.0 * n as f64 - 1.0 - a.abs()))
}

/// Symmetric partial product `prod_{|n| <= N} T(n)` with
/// `T(n) = ((2 pi n)^2 + (alpha+gamma)^2) / ((2 pi n)^2 + (alpha-gamma)^2)`,
/// which converges to `((1 - e^{-(alpha+gamma)}) / (e^{-alpha} - e^{-gamma}))^2`.
/// Its logarithm over `2 pi` is the punctured-disk Green's function at
/// `(e^{-alpha}, e^{-gamma})`; see the oracle module.
pub fn mirror_product(alpha: f64, gamma: f64, n: usize) -> Result<f64> {
    check_mirror_heights(alpha, gamma)?;
    let sp = (alpha + gamma).powi(2);
    let sm = (alpha - gamma).powi(2);
    let mut prod = 1.0;
    for k in (1..=n).rev() {
        let q = (2.0 * PI * k as f64).powi(2);
        let t = (q + sp) / (q + sm);
        prod *= t * t;
    }
    Ok(prod * sp / sm)
}

/// The limit of [`mirror_product`].
pub fn mirror_product_closed(alpha: f64, gamma: f64) -> Result<f64> {
    check_mirror_heights(alpha, gamma)?;
    Ok((((-(alpha + gamma)).exp() - 1.0) / ((-alpha).exp() - (-gamma).exp())).powi(2))
}

/// Relative tail of [`mirror_product`]: `exp(2 alpha gamma / (pi^2 n)) - 1`.
pub fn mirror_product_tail_bound(alpha: f64, gamma: f64, n: usize) -> f64 {
    (2.0 * alpha * gamma / (PI * PI * n as f64)).exp() - 1.0
}

/// `alpha prod_{n=1..N} (1 + (alpha/(pi n))^2)`, increasing to `sinh alpha`.
pub fn sinh_product(alpha: f64, n: usize) -> f64 {
    let mut prod = alpha;
    for k in (1..=n).rev() {
        let r = alpha / (PI * k as f64);
        prod *= 1.0 + r * r;
    }
    prod
}

/// Relative tail of [`sinh_product`]: `exp(alpha^2/(pi^2 n)) - 1`.
pub fn sinh_product_tail_bound(alpha: f64, n: usize) -> f64 {
    (alpha * alpha / (PI * PI * n as f64)).exp() - 1.0
}

/// `x prod_{n=1..N} (1 - (x/(pi n))^2)`, tending to `sin x`. Factors stay
/// meaningful only while `|x| < pi (N+1)`.
pub fn sine_product(x: f64, n: usize) -> Result<f64> {
    if !(x.abs() < PI * (n as f64 + 1.0)) {
        return Err(Error::Domain(format!(
            "need |x| < pi (n+1) to keep the factors meaningful, got x = {x}, n = {n}"
        )));
    }
    let mut prod = x;
    for k in (1..=n).rev() {
        let r = x / (PI * k as f64);
        prod *= 1.0 - r * r;
    }
    Ok(prod)
}

/// The product route to the reciprocal-square sum: the quadratic coefficient
/// of the sinh product is `sum 1/(pi n)^2`, so rescaling by `pi^2` gives
/// `sum_{k=1..n} 1/k^2`, tending to `pi^2/6` with tail below `1/n`.
pub fn basel_from_product(n: usize) -> f64 {
    // Pairwise rather than running summation: at n = 10^6 the true tail
    // undershoots 1/n by only ~5e-13, so a running sum's O(n)-ulp rounding
    // drift could push the partial sum outside its own tail bound.
    let terms: Vec<f64> = (1..=n)
        .map(|k| {
            let kf = k as f64;
            1.0 / (kf * kf)
        })
        .collect();
    crate::quad::pairwise_sum(&terms)
}

/// Tail of [`basel_from_product`]: `1/n`.
pub fn basel_product_tail_bound(n: usize) -> f64 {
    1.0 / n as f64
}

fn check_strip_start(a: f64) -> Result<()> {
    if a > -1.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("start must lie in (-1, 1), got {a}")))
    }
}

fn check_mirror_heights(alpha: f64, gamma: f64) -> Result<()> {
    if !(alpha > 0.0 && gamma > 0.0) {
        return Err(Error::Domain(format!(
            "heights must be positive, got {alpha}, {gamma}"
        )));
    }
    if alpha == gamma {
        return Err(Error::Domain(
            "the product form has a pole at alpha = gamma".into(),
        ));
    }
    Ok(())
}

fn check_not_full_turn(theta: f64) -> Result<()> {
    let reduced = theta.rem_euclid(2.0 * PI);
    if reduced.min(2.0 * PI - reduced) < 1e-12 {
        Err(Error::Domain(format!(
            "the sum has a pole at theta = 0 mod 2 pi, got {theta}"
        )))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::strip_exit_density_closed;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const BASEL: f64 = PI * PI / 6.0;

    #[test]
    fn exit_time_from_coeffs_examples() {
        let ident = PowerSeriesCoeffs::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(exit_time_from_coeffs(&ident), 0.5);

        let doubled = PowerSeriesCoeffs::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(2.0, 0.0),
        ])
        .unwrap();
        assert_eq!(exit_time_from_coeffs(&doubled), 2.0);

        // Arctangent coefficients: half the odd squares, towards pi^2/16.
        let c = PowerSeriesCoeffs::arctan(20_001);
        let got = exit_time_from_coeffs(&c);
        assert_abs_diff_eq!(got, 0.5 * odd_square_sum(10_001), epsilon = 1e-15);
        assert!(got < PI * PI / 16.0);
        assert!(PI * PI / 16.0 - got < 0.5 * odd_square_tail_bound(10_001));
    }

    #[test]
    fn arctan_coeff_examples() {
        assert_eq!(arctan_coeff(1).unwrap(), 1.0);
        assert_eq!(arctan_coeff(2).unwrap(), 0.0);
        assert_eq!(arctan_coeff(3).unwrap(), -1.0 / 3.0);
        assert_eq!(arctan_coeff(5).unwrap(), 0.2);
        assert_eq!(arctan_coeff(7).unwrap(), -1.0 / 7.0);
        assert!(arctan_coeff(0).is_err());
    }

    #[test]
    fn coeff_extract_matches_known_series() {
        let ident = ConformalMap::DiskAutomorphism { a: Complex64::new(0.0, 0.0) };
        let got = coeff_extract(&ident, 1, 0.5, 64).unwrap();
        assert_abs_diff_eq!((got - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);

        let got = coeff_extract(&ConformalMap::ArcTan, 3, 0.9, 256).unwrap();
        assert_abs_diff_eq!(got.re, -1.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);

        let got = coeff_extract(&ConformalMap::ArcTan, 2, 0.9, 256).unwrap();
        assert_abs_diff_eq!(got.norm(), 0.0, epsilon = 1e-12);

        assert!(coeff_extract(&ConformalMap::ArcTan, 3, 1.5, 256).is_err());
        assert!(coeff_extract(&ConformalMap::ArcTan, 100, 0.9, 256).is_err());
    }

    #[test]
    fn odd_square_sum_reaches_its_limit() {
        assert_eq!(odd_square_sum(1), 1.0);
        assert_abs_diff_eq!(odd_square_sum(2), 1.0 + 1.0 / 9.0, epsilon = 1e-16);
        let n = 1_000_000;
        let gap = PI * PI / 8.0 - odd_square_sum(n);
        assert!(gap > 0.0 && gap < 2.0 / (4.0 * n as f64), "gap {gap}");
        assert!(gap < odd_square_tail_bound(n));
        assert_relative_eq!(basel_from_odd(PI * PI / 8.0), BASEL, max_relative = 1e-15);
    }

    #[test]
    fn wrapped_gap_shrinks_with_truncation() {
        assert!(wrapped_sum_identity_gap(0.5, PI, 1000).unwrap() < 1e-3);
        assert!(wrapped_sum_identity_gap(0.9, PI / 2.0, 10_000).unwrap() < 1e-4);
        let g1 = wrapped_sum_identity_gap(0.5, PI, 10).unwrap();
        let g2 = wrapped_sum_identity_gap(0.5, PI, 1000).unwrap();
        assert!(g2 < g1 / 50.0);
    }

    #[test]
    fn cosec_sum_approaches_closed_form() {
        assert_relative_eq!(cosec_identity_lhs(PI, 0).unwrap(), 1.0 / (PI * PI), max_relative = 1e-15);
        assert_relative_eq!(cosec_identity_rhs(PI).unwrap(), 0.25, max_relative = 1e-15);
        for (theta, want) in [(PI, 0.25), (PI / 2.0, 0.5)] {
            let n = 100_000;
            let got = cosec_identity_lhs(theta, n).unwrap();
            let bound = cosec_tail_bound(theta, n).unwrap();
            assert!((want - got).abs() <= bound, "theta {theta}: gap {} bound {bound}", want - got);
        }
        assert!(cosec_identity_lhs(0.0, 10).is_err());
        assert!(cosec_identity_lhs(4.0 * PI, 10).is_err());
    }

    #[test]
    fn regularized_cosec_is_continuous_at_zero() {
        assert_eq!(theta_limit_value(), 1.0 / 12.0);
        assert_abs_diff_eq!(cosec_minus_pole(1e-4), 1.0 / 12.0, epsilon = 1e-9);
        assert_relative_eq!(
            cosec_minus_pole(PI),
            0.25 - 1.0 / (PI * PI),
            max_relative = 1e-15
        );
        // The Taylor branch and the closed form agree where they hand over.
        // The closed form is evaluated stably via 4 sin^2(t/2) but still
        // loses ~7 digits to the pole subtraction, hence the 2e-9 window.
        for theta in [9.9e-4_f64, 1.00001e-3, 2e-3, 5e-3] {
            let s = (theta / 2.0).sin();
            let closed = 1.0 / (4.0 * s * s) - 1.0 / (theta * theta);
            assert_abs_diff_eq!(cosec_minus_pole(theta), closed, epsilon = 2e-9);
        }
        // Monotone growth away from the limit value.
        assert!(cosec_minus_pole(0.0) == 1.0 / 12.0);
        assert!(cosec_minus_pole(1.0) > 1.0 / 12.0);
    }

    #[test]
    fn wrapped_route_recovers_reciprocal_squares() {
        assert_relative_eq!(
            wrapped_nonzero_sum(0.0, 1).unwrap(),
            2.0 / (4.0 * PI * PI),
            max_relative = 1e-15
        );
        assert!((wrapped_nonzero_sum(0.0, 1).unwrap() - 0.050661).abs() < 1e-6);

        let n = 10_000;
        let gap = 1.0 / 12.0 - wrapped_nonzero_sum(0.0, n).unwrap();
        assert!(gap > 0.0 && gap < 2.0 / (4.0 * PI * PI * n as f64));
        assert!(gap < wrapped_nonzero_tail_bound(n));

        // The rescaled form is literally the first n reciprocal squares.
        assert_abs_diff_eq!(
            basel_from_wrapping(4, 0.0).unwrap(),
            1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0,
            epsilon = 1e-14
        );
        let n = 100_000;
        let gap = BASEL - basel_from_wrapping(n, 0.0).unwrap();
        assert!(gap.abs() < basel_wrapping_tail_bound(n));
    }

    #[test]
    fn reflection_series_brackets_its_limit() {
        assert_relative_eq!(reflection_series(0.0, 1).unwrap(), 1.0 / PI, max_relative = 1e-15);
        for a in [-0.9, 0.0, 0.5] {
            let limit = strip_exit_density_closed(a).unwrap();
            let mut prev = reflection_series(a, 1).unwrap();
            for n in 2..400 {
                let s = reflection_series(a, n).unwrap();
                assert!(
                    prev.min(s) <= limit && limit <= prev.max(s),
                    "a = {a}, n = {n}: bracket [{}, {}] missed {limit}",
                    prev.min(s),
                    prev.max(s)
                );
                prev = s;
            }
        }
    }

    #[test]
    fn bracketed_evaluation_hits_closed_form() {
        for a in [-0.9, -0.3, 0.0, 0.5] {
            let got = reflection_series_bracketed(a, 1e-8, u64::MAX).unwrap();
            let want = strip_exit_density_closed(a).unwrap();
            assert!(
                (got - want).abs() <= 1e-8 / 2.0 + 1e-12,
                "a = {a}: got {got}, want {want}"
            );
        }
        assert!(matches!(
            reflection_series_bracketed(0.0, 1e-9, 1000),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn derivative_series_and_its_closed_form() {
        assert_eq!(reflection_series_derivative(0.0, 2).unwrap(), 1.0 + 1.0 / 9.0);
        let n = 1_000_000;
        assert_eq!(reflection_series_derivative(0.0, n).unwrap(), odd_square_sum(n));
        assert_relative_eq!(reflection_derivative_closed(0.0).unwrap(), PI * PI / 8.0, max_relative = 1e-15);
        for a in [-0.7, 0.0, 0.5] {
            let got = reflection_series_derivative(a, n).unwrap();
            let want = reflection_derivative_closed(a).unwrap();
            assert!(
                (want - got).abs() <= reflection_derivative_tail_bound(a, n),
                "a = {a}: gap {}",
                want - got
            );
        }
    }

    #[test]
    fn derivative_matches_finite_difference_of_the_series() {
        // The derivative series differentiates pi times the reflection series,
        // so the finite difference picks up a factor pi. Same truncation on
        // both sides makes the tails cancel.
        let (h, n) = (1e-5, 100_000);
        for a in [0.0, 0.4, -0.4] {
            let fd = (reflection_series(a + h, n).unwrap()
                - reflection_series(a - h, n).unwrap())
                / (2.0 * h);
            let got = reflection_series_derivative(a, n).unwrap();
            assert!(
                (PI * fd - got).abs() < 1e-4,
                "a = {a}: pi fd {} vs series {got}",
                PI * fd
            );
        }
    }

    #[test]
    fn mirror_product_examples() {
        assert_relative_eq!(mirror_product(1.0, 2.0, 0).unwrap(), 9.0, max_relative = 1e-15);
        for n in [0, 1, 10, 1000] {
            assert_eq!(
                mirror_product(1.0, 2.0, n).unwrap(),
                mirror_product(2.0, 1.0, n).unwrap()
            );
        }
        let n = 100_000;
        let got = mirror_product(1.0, 2.0, n).unwrap();
        let want = mirror_product_closed(1.0, 2.0).unwrap();
        assert!(
            (got / want - 1.0).abs() <= mirror_product_tail_bound(1.0, 2.0, n),
            "relative gap {}",
            got / want - 1.0
        );
        assert!(mirror_product(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn sinh_and_sine_products_converge() {
        assert_eq!(sinh_product(0.0, 50), 0.0);
        let got = sinh_product(1.0, 100);
        assert!((got / 1.0_f64.sinh() - 1.0).abs() < 1.1e-3);
        let n = 100_000;
        let got = sinh_product(1.0, n);
        let rel = (got / 1.0_f64.sinh() - 1.0).abs();
        assert!(rel <= sinh_product_tail_bound(1.0, n), "rel {rel}");
        // Increasing in n for nonzero argument.
        assert!(sinh_product(1.0, 101) > sinh_product(1.0, 100));

        assert_relative_eq!(
            sine_product(1.0, 10_000).unwrap(),
            1.0_f64.sin(),
            max_relative = 2e-4
        );
        let got = sine_product(PI / 2.0, 1_000_000).unwrap();
        assert!((got - 1.0).abs() < 1e-5);
        // The first factor pins sin(pi) = 0 in the limit; finite n decays.
        assert!(sine_product(PI, 10_000).unwrap().abs() < 1e-3);
        assert!(sine_product(10.0, 2).is_err());
    }

    #[test]
    fn product_route_recovers_reciprocal_squares() {
        assert_eq!(basel_from_product(1), 1.0);
        let n = 1_000_000;
        let gap = BASEL - basel_from_product(n);
        assert!(gap > 0.0 && gap <= basel_product_tail_bound(n), "gap {gap}");
    }

    #[test]
    fn quadratic_coefficient_of_log_sinh_product() {
        // d^2/da^2 [ln(sinh_product(a, n)/a)] at 0 equals 2 sum 1/(pi k)^2;
        // the symmetric second difference of g(a) = sum ln(1 + (a/pi k)^2)
        // needs g(0) = 0 only.
        let n = 1000;
        let h = 1e-3;
        let g = |a: f64| -> f64 {
            (1..=n).rev().map(|k| (a / (PI * k as f64)).powi(2).ln_1p()).sum()
        };
        let fd2 = (g(h) + g(-h)) / (h * h);
        let direct = 2.0 / (PI * PI) * basel_from_product(n);
        assert_abs_diff_eq!(fd2, direct, epsilon = 1e-6);
    }

    #[test]
    fn four_routes_agree_on_basel() {
        let odd = basel_from_odd(odd_square_sum(2_000_000));
        assert!((odd - BASEL).abs() < 4.0 / 3.0 * odd_square_tail_bound(2_000_000));

        let wrapped = basel_from_wrapping(1_000_000, 0.0).unwrap();
        assert!((wrapped - BASEL).abs() < basel_wrapping_tail_bound(1_000_000));

        let product = basel_from_product(1_000_000);
        assert!((product - BASEL).abs() < basel_product_tail_bound(1_000_000));

        let refl = basel_from_odd(reflection_series_derivative(0.0, 2_000_000).unwrap());
        assert!((refl - BASEL).abs() < 4.0 / 3.0 * reflection_derivative_tail_bound(0.0, 2_000_000));
    }

    #[test]
    fn fixed_truncation_is_bit_reproducible() {
        assert_eq!(
            odd_square_sum(12_345).to_bits(),
            odd_square_sum(12_345).to_bits()
        );
        assert_eq!(
            reflection_series(0.37, 9999).unwrap().to_bits(),
            reflection_series(0.37, 9999).unwrap().to_bits()
        );
        assert_eq!(
            mirror_product(0.7, 1.9, 4321).unwrap().to_bits(),
            mirror_product(0.7, 1.9, 4321).unwrap().to_bits()
        );
    }

    #[test]
    fn truncation_policy_resolution() {
        let p = TruncationPolicy::fixed(500);
        assert_eq!(p.resolve(odd_square_tail_bound).unwrap(), 500);
        assert!(TruncationPolicy::fixed(0).resolve(odd_square_tail_bound).is_err());

        let p = TruncationPolicy::tail_bound(1e-4, 1 << 30);
        let n = p.resolve(odd_square_tail_bound).unwrap();
        assert!(odd_square_tail_bound(n) <= 1e-4);
        assert!(n == 1 || odd_square_tail_bound(n - 1) > 1e-4, "n = {n} not minimal");

        let p = TruncationPolicy::tail_bound(1e-12, 100);
        assert!(p.resolve(odd_square_tail_bound).is_err());
    }
}
