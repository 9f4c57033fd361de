//! Small quadrature kit used by the oracles and the goodness-of-fit layer.
//!
//! Everything here is deterministic fixed-order quadrature; the integrands in
//! this crate are smooth away from isolated endpoints, so composite
//! Gauss-Legendre panels and the periodic trapezoid rule reach close to machine
//! accuracy at modest node counts.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; standard and exact to machine
/// precision for the orders used here (`n <= 64`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "quadrature order must be at least 2");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th positive root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: evaluates P_n(x) and P'_n(x).
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Single-panel Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        sum += w * f(mid + half * x);
    }
    half * sum
}

/// Composite Gauss-Legendre integral: `panels` equal panels of given order.
pub fn gl_composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let (nodes, weights) = gauss_legendre(order);
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            panel += w * f(mid + 0.5 * h * x);
        }
        sum += panel;
    }
    0.5 * h * sum
}

/// Trapezoid rule for a function with period `b - a`, sampled at `n` points.
///
/// Spectrally accurate for smooth periodic integrands, which covers every
/// circle integral in this crate.
pub fn trapezoid_periodic<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        sum += f(a + i as f64 * h);
    }
    sum * h
}

/// Pairwise (recursive-halving) sum of a slice.
///
/// Rounding error grows like `O(log n)` in ulps instead of the `O(n)` of a
/// running sum, which matters when a sum of millions of terms must land inside
/// a tolerance window only a few ulps wider than the truncation error itself.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 32;
    if xs.len() <= BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Cumulative distribution of a density on `[a, b]`, built once on a uniform
/// grid and evaluated exactly per query with a local Gauss panel.
///
/// `eval` is monotone up to quadrature error and suited for use as the
/// reference CDF in a Kolmogorov-Smirnov test.
pub struct GridCdf<F: Fn(f64) -> f64> {
    density: F,
    a: f64,
    h: f64,
    cum: Vec<f64>,
}

impl<F: Fn(f64) -> f64> GridCdf<F> {
    pub fn new(density: F, a: f64, b: f64, cells: usize) -> Self {
        assert!(b > a && cells >= 2);
        let h = (b - a) / cells as f64;
        let mut cum = Vec::with_capacity(cells + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            let lo = a + i as f64 * h;
            acc += gl_panel(&density, lo, lo + h, 8);
            cum.push(acc);
        }
        GridCdf { density, a, h, cum }
    }

    /// Total mass over the construction interval.
    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let cells = self.cum.len() - 1;
        let t = (x - self.a) / self.h;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= cells as f64 {
            return self.total();
        }
        let i = t as usize;
        let lo = self.a + i as f64 * self.h;
        self.cum[i] + gl_panel(&self.density, lo, x, 8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n-point GL is exact through degree 2n-1.
        let f = |x: f64| 7.0 * x.powi(6) - 3.0 * x.powi(4) + x - 2.0;
        let exact = 2.0 * (7.0 / 7.0 - 3.0 / 5.0 - 2.0);
        assert_abs_diff_eq!(gl_panel(&f, -1.0, 1.0, 4), exact, epsilon = 1e-13);
    }

    #[test]
    fn gl_composite_matches_analytic_integral() {
        let val = gl_composite(&|x: f64| x.exp(), 0.0, 2.0, 8, 16);
        assert_abs_diff_eq!(val, 2.0_f64.exp() - 1.0, epsilon = 1e-13);
    }

    #[test]
    fn periodic_trapezoid_is_spectral_on_smooth_integrands() {
        let f = |t: f64| (t.sin()).exp();
        let val = trapezoid_periodic(&f, 0.0, 2.0 * PI, 64);
        // 2*pi*I_0(1), with I_0 the modified Bessel function.
        assert_abs_diff_eq!(val, 2.0 * PI * 1.2660658777520084, epsilon = 1e-12);
    }

    #[test]
    fn pairwise_sum_beats_running_sum_on_harmonic_tail() {
        // Sum 1/k^2 ascending for k = 1..=2_000_000; the pairwise result must
        // sit within a few ulps of a compensated (Kahan) reference.
        let n = 2_000_000usize;
        let xs: Vec<f64> = (1..=n).map(|k| 1.0 / (k as f64 * k as f64)).collect();
        let (mut kahan, mut c) = (0.0_f64, 0.0_f64);
        for &x in &xs {
            let y = x - c;
            let t = kahan + y;
            c = (t - kahan) - y;
            kahan = t;
        }
        assert_abs_diff_eq!(pairwise_sum(&xs), kahan, epsilon = 5e-15);
        assert_abs_diff_eq!(pairwise_sum(&xs[..7]), xs[..7].iter().sum::<f64>(), epsilon = 0.0);
    }

    #[test]
    fn grid_cdf_matches_closed_form() {
        // Standard Cauchy, cells narrow enough for GL-8 to be exact to
        // machine precision on each.
        let cdf = GridCdf::new(|x: f64| 1.0 / (PI * (1.0 + x * x)), -50.0, 50.0, 20_000);
        for x in [-3.0_f64, -0.5, 0.0, 1.0, 7.5] {
            let exact = 0.5 + x.atan() / PI;
            // The window clips the tails; shift by the mass below its start.
            let below = 0.5 + (-50.0_f64).atan() / PI;
            assert_abs_diff_eq!(cdf.eval(x) + below, exact, epsilon = 1e-12);
        }
        assert!(cdf.total() > 0.95 && cdf.total() <= 1.0);
    }
}
