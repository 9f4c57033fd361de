//! Goodness-of-fit machinery: the statistics that turn samples plus an exact
//! reference law into pass/fail verdicts.
//!
//! All p-values are asymptotic; the sample sizes in this crate (10^4 and up)
//! are far inside the asymptotic regime, and the acceptance thresholds are
//! loose enough (0.01, 0.001) to absorb the approximation.

use std::f64::consts::PI;

use crate::quad::gl_composite;
use crate::sampler::McEstimate;
use crate::{Error, Result};

/// Which test produced a [`GoodnessOfFit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Ks,
    ChiSquare,
}

/// Outcome of a goodness-of-fit test: the raw statistic, its asymptotic
/// p-value in `[0, 1]`, and the sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub p_value: f64,
    pub n: u64,
    pub kind: TestKind,
}

/// Sample mean and standard error (sample standard deviation over `sqrt(n)`).
///
/// The `seed` field of the estimate is zero: the samples arrive as data, not
/// from a stream this function controls.
pub fn mean_ci(samples: &[f64]) -> Result<McEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let stderr = (ss / (nf - 1.0) / nf).sqrt();
    Ok(McEstimate { mean, stderr, n: n as u64, seed: 0 })
}

/// One-sample Kolmogorov-Smirnov test of `samples` against the reference
/// `cdf`, which must be monotone on the sample range with values in `[0, 1]`.
///
/// The p-value is the asymptotic Kolmogorov series
/// `2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)` at `x = sqrt(n) D_n`, truncated
/// once a term drops below `1e-10` in magnitude and clamped to `[0, 1]`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<GoodnessOfFit> {
    let n = samples.len();
    if n < 10 {
        return Err(Error::InsufficientData { needed: 10, got: n });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("samples must be comparable"));
    let nf = n as f64;
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x).clamp(0.0, 1.0);
        let above = (i + 1) as f64 / nf - f;
        let below = f - i as f64 / nf;
        d = d.max(above).max(below);
    }
    let d = d.clamp(0.0, 1.0);
    Ok(GoodnessOfFit {
        statistic: d,
        p_value: kolmogorov_tail(nf.sqrt() * d),
        n: n as u64,
        kind: TestKind::Ks,
    })
}

/// Survival function of the Kolmogorov distribution at `x`.
fn kolmogorov_tail(x: f64) -> f64 {
    // The series is numerically vacuous for tiny x (all terms ~1, alternating
    // forever); statistically that regime is certain acceptance.
    if x < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=1000 {
        let term = (-2.0 * (k as f64 * k as f64) * x * x).exp();
        sum += sign * term;
        if term < 1e-10 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square test of angular `samples` (radians, binned over
/// `(-pi, pi]`) against a probability `density` on the circle.
///
/// Bin probabilities come from composite Gauss-Legendre quadrature of the
/// density over each bin and must sum to 1 within `1e-10`; the p-value is the
/// upper chi-square tail with `bins - 1` degrees of freedom.
pub fn chi_square_circle<F: Fn(f64) -> f64>(
    samples: &[f64],
    density: F,
    bins: usize,
) -> Result<GoodnessOfFit> {
    if bins < 4 {
        return Err(Error::BinUnderflow(format!("need at least 4 bins, got {bins}")));
    }
    let n = samples.len();
    let nf = n as f64;
    let width = 2.0 * PI / bins as f64;

    let mut probs = Vec::with_capacity(bins);
    for b in 0..bins {
        let lo = -PI + b as f64 * width;
        probs.push(gl_composite(&density, lo, lo + width, 4, 16));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "density mass over the circle is {total}, not a probability density"
        )));
    }
    for p in probs.iter_mut() {
        *p /= total;
    }

    if let Some(min_expected) = probs.iter().map(|p| p * nf).min_by(|a, b| a.total_cmp(b)) {
        if min_expected < 5.0 {
            return Err(Error::BinUnderflow(format!(
                "smallest expected bin count is {min_expected:.3}, below 5"
            )));
        }
    }

    let mut counts = vec![0u64; bins];
    for &theta in samples {
        // Wrap into (-pi, pi]; arg() output already is, but accept any angle.
        let mut t = (theta + PI).rem_euclid(2.0 * PI);
        if t == 0.0 {
            t = 2.0 * PI;
        }
        let idx = ((t / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }

    let mut stat = 0.0;
    for (c, p) in counts.iter().zip(&probs) {
        let expected = p * nf;
        let diff = *c as f64 - expected;
        stat += diff * diff / expected;
    }

    let df = (bins - 1) as f64;
    let p_value = if stat <= 0.0 {
        1.0
    } else {
        statrs::function::gamma::gamma_ur(df / 2.0, stat / 2.0).clamp(0.0, 1.0)
    };
    Ok(GoodnessOfFit { statistic: stat, p_value, n: n as u64, kind: TestKind::ChiSquare })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::poisson_disk;
    use crate::rng::RandomStreamKey;
    use crate::sampler::sample_exit_disk;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;
    use rand::Rng;

    #[test]
    fn mean_ci_matches_hand_calculations() {
        let flat = mean_ci(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!((flat.mean, flat.stderr), (1.0, 0.0));
        assert_eq!((flat.n, flat.seed), (4, 0));
        // sd = sqrt(2), stderr = sqrt(2)/sqrt(2) = 1.
        let pair = mean_ci(&[0.0, 2.0]).unwrap();
        assert_eq!((pair.mean, pair.stderr), (1.0, 1.0));
        assert_eq!(
            mean_ci(&[3.0]),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        );
    }

    fn uniform_samples(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::CounterRng::new(seed, 0);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn ks_accepts_its_own_law() {
        let xs = uniform_samples(10_000, 42);
        let got = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(got.p_value > 0.01, "p = {}", got.p_value);
        assert!((0.0..=1.0).contains(&got.statistic));
        assert_eq!(got.kind, TestKind::Ks);
        assert_eq!(got.n, 10_000);
    }

    #[test]
    fn ks_rejects_a_point_mass_at_the_median() {
        let xs = vec![0.5; 100];
        let got = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(got.statistic, 0.5, epsilon = 1e-2);
        assert!(got.p_value < 1e-6, "p = {}", got.p_value);
    }

    #[test]
    fn ks_needs_ten_samples() {
        assert_eq!(
            ks_test(&[0.1; 9], |x| x),
            Err(Error::InsufficientData { needed: 10, got: 9 })
        );
    }

    #[test]
    fn ks_is_invariant_under_monotone_transforms() {
        // Same data seen through x and through x^3 give the same statistic:
        // cube the samples and pre-compose the cdf with the cube root.
        let xs = uniform_samples(500, 9);
        let plain = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        let cubed: Vec<f64> = xs.iter().map(|x| x.powi(3)).collect();
        let transformed = ks_test(&cubed, |y| y.cbrt().clamp(0.0, 1.0)).unwrap();
        assert_relative_eq!(plain.statistic, transformed.statistic, max_relative = 1e-12);
        assert_relative_eq!(plain.p_value, transformed.p_value, max_relative = 1e-9);
    }

    #[test]
    fn chi_square_accepts_uniform_angles() {
        let n = 100_000;
        let mut rng = crate::rng::CounterRng::new(4, 0);
        let angles: Vec<f64> =
            (0..n).map(|_| -PI + 2.0 * PI * rng.random::<f64>()).collect();
        let got = chi_square_circle(&angles, |_| 1.0 / (2.0 * PI), 32).unwrap();
        assert!(got.p_value > 0.001, "p = {}", got.p_value);
        assert!(got.statistic >= 0.0);
        assert_eq!(got.kind, TestKind::ChiSquare);
    }

    #[test]
    fn chi_square_matches_exit_angles_to_the_poisson_kernel() {
        let a = Complex64::new(0.5, 0.0);
        let angles: Vec<f64> = (0..20_000)
            .map(|i| sample_exit_disk(a, RandomStreamKey::new(8, i)).unwrap().arg())
            .collect();
        let got =
            chi_square_circle(&angles, |t| poisson_disk(a, t).unwrap(), 24).unwrap();
        assert!(got.p_value > 0.001, "p = {}", got.p_value);
    }

    #[test]
    fn chi_square_detects_a_mismatched_law() {
        // Uniform exit angles (start at 0) against the density for a = 0.5.
        let angles: Vec<f64> = (0..100_000)
            .map(|i| {
                sample_exit_disk(Complex64::ZERO, RandomStreamKey::new(1, i)).unwrap().arg()
            })
            .collect();
        let got = chi_square_circle(
            &angles,
            |t| poisson_disk(Complex64::new(0.5, 0.0), t).unwrap(),
            32,
        )
        .unwrap();
        assert!(got.p_value < 1e-6, "p = {}", got.p_value);
    }

    #[test]
    fn chi_square_guards_bins_and_counts() {
        let angles = uniform_samples(1000, 2);
        assert!(matches!(
            chi_square_circle(&angles, |_| 1.0 / (2.0 * PI), 3),
            Err(Error::BinUnderflow(_))
        ));
        let few = uniform_samples(50, 2);
        assert!(matches!(
            chi_square_circle(&few, |_| 1.0 / (2.0 * PI), 16),
            Err(Error::BinUnderflow(_))
        ));
        // A density with mass 2 is not a probability density.
        assert!(matches!(
            chi_square_circle(&angles, |_| 1.0 / PI, 8),
            Err(Error::Domain(_))
        ));
    }
}
