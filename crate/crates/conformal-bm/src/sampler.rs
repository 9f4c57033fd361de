//! Monte Carlo layer: exact exit-point samplers, Euler walks, and the
//! deterministic parallel driver.
//!
//! Exact samplers invert closed-form exit CDFs, so they carry no step error.
//! Walk-based estimators discretize with a fixed step `dt` and inherit its
//! bias; tolerances downstream account for that.
//!
//! Reproducibility contract: every result is a pure function of `(seed, n)`
//! and the other numeric arguments. Path `i` draws only from the stream keyed
//! `(seed, i)`; per-path values are combined chunk by chunk in index order
//! with a fixed summation tree. Worker count affects scheduling only, never
//! the result bits.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::domain::Domain;
use crate::map::ConformalMap;
use crate::occupation::{GridGeometry, OccupationGrid};
use crate::quad::pairwise_sum;
use crate::rng::{CounterRng, RandomStreamKey};
use crate::{Error, Result};

use std::f64::consts::{FRAC_PI_4, PI};

/// Step budget for walk-based estimators, chosen so that honest exits from the
/// bounded domains in this crate hit it with negligible probability.
pub const DEFAULT_MAX_STEPS: u64 = 100_000_000;

/// Paths per parallel work unit. Fixed, so the chunk boundaries (and hence
/// the summation tree) never depend on worker count.
const CHUNK: u64 = 4096;

/// Parameters of a discretized Brownian walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub dt: f64,
    pub max_steps: u64,
    pub domain: Domain,
    pub start: Complex64,
}

impl PathConfig {
    pub fn new(dt: f64, max_steps: u64, domain: Domain, start: Complex64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("step size must be positive and finite, got {dt}")));
        }
        if max_steps == 0 {
            return Err(Error::Domain("step budget must be at least 1".into()));
        }
        if !domain.contains(start) {
            return Err(Error::Domain(format!("start {start} is not inside {domain:?}")));
        }
        Ok(PathConfig { dt, max_steps, domain, start })
    }
}

/// A Monte Carlo mean with its standard error and full provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; infinite when `n < 2`.
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

/// Exit point of a Brownian motion started at `a` in the unit disk: the
/// harmonic-measure law, sampled exactly by pushing a uniform boundary point
/// through the disk automorphism taking 0 to `a`.
pub fn sample_exit_disk(a: Complex64, key: RandomStreamKey) -> Result<Complex64> {
    if a.norm() >= 1.0 || !a.re.is_finite() || !a.im.is_finite() {
        return Err(Error::Domain(format!("start {a} is not inside the unit disk")));
    }
    let mut rng = CounterRng::from_key(key);
    let u: f64 = rng.random();
    let w = Complex64::from_polar(1.0, 2.0 * PI * u);
    // Inverse of z -> (z-a)/(1 - conj(a) z): rotation-invariant boundary law
    // becomes the Poisson kernel at a.
    Ok((w + a) / (Complex64::ONE + a.conj() * w))
}

/// Exit point (as a real abscissa) of a Brownian motion started at height `v`
/// on the imaginary axis in the upper half-plane: Cauchy with scale `v`,
/// sampled exactly by CDF inversion.
pub fn sample_exit_halfplane(v: f64, key: RandomStreamKey) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("start height must be positive and finite, got {v}")));
    }
    let mut rng = CounterRng::from_key(key);
    let u: f64 = rng.random();
    Ok(v * (PI * (u - 0.5)).tan())
}

/// Exit point of a Brownian motion started at real `a` in the strip
/// `{|Re z| < 1}`: the disk sample at `tan(pi a / 4)` carried back through the
/// principal arctangent. The real part lands on a wall (`|Re| = 1`) up to
/// float error in the map; no snapping is applied.
pub fn sample_exit_strip(a: f64, key: RandomStreamKey) -> Result<Complex64> {
    if !(a.abs() < 1.0) {
        return Err(Error::Domain(format!("start {a} is not inside the unit strip")));
    }
    let w = sample_exit_disk(Complex64::new((FRAC_PI_4 * a).tan(), 0.0), key)?;
    Ok(w.atan() * (4.0 / PI))
}

/// Exit time of a one-dimensional Euler walk from `a` out of `(-h, h)`,
/// with the default step budget. Returns `steps * dt` for the first step
/// landing at `|x| >= h`.
pub fn simulate_exit_time_1d(h: f64, a: f64, dt: f64, key: RandomStreamKey) -> Result<f64> {
    simulate_exit_time_1d_capped(h, a, dt, key, DEFAULT_MAX_STEPS)
}

/// [`simulate_exit_time_1d`] with an explicit step budget; exceeding it is an
/// error, never a silent truncation, because a censored mean is biased low.
pub fn simulate_exit_time_1d_capped(
    h: f64,
    a: f64,
    dt: f64,
    key: RandomStreamKey,
    max_steps: u64,
) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("half-width must be positive and finite, got {h}")));
    }
    if a.abs() >= h {
        return Err(Error::Domain(format!("start {a} is not inside (-{h}, {h})")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("step size must be positive and finite, got {dt}")));
    }
    if max_steps == 0 {
        return Err(Error::Domain("step budget must be at least 1".into()));
    }
    let mut rng = CounterRng::from_key(key);
    let sqrt_dt = dt.sqrt();
    let mut x = a;
    let mut steps: u64 = 0;
    loop {
        let g: f64 = rng.sample(StandardNormal);
        x += sqrt_dt * g;
        steps += 1;
        if x.abs() >= h {
            return Ok(steps as f64 * dt);
        }
        if steps >= max_steps {
            return Err(Error::MaxStepsExceeded { max_steps });
        }
    }
}

/// One discretized planar path: `[start, ..., first point outside]`. Every
/// point but the last is inside `cfg.domain`, so the exit time is
/// `(len - 1) * dt`. Each step draws the real increment before the imaginary
/// one from the path's stream.
pub fn walk_path(cfg: &PathConfig, key: RandomStreamKey) -> Result<Vec<Complex64>> {
    match walk_path_truncated(cfg, key)? {
        (path, true) => Ok(path),
        _ => Err(Error::MaxStepsExceeded { max_steps: cfg.max_steps }),
    }
}

/// [`walk_path`] with the budget as a time horizon: returns the path walked
/// so far plus whether it actually exited. A non-exited path ends with an
/// inside point; [`time_change_integral`] then accounts exactly for the steps
/// taken, which is what estimators with an explicit horizon need.
pub fn walk_path_truncated(
    cfg: &PathConfig,
    key: RandomStreamKey,
) -> Result<(Vec<Complex64>, bool)> {
    if !cfg.domain.contains(cfg.start) {
        return Err(Error::Domain(format!(
            "start {} is not inside {:?}",
            cfg.start, cfg.domain
        )));
    }
    let mut rng = CounterRng::from_key(key);
    let sqrt_dt = cfg.dt.sqrt();
    let mut path = Vec::new();
    let mut z = cfg.start;
    path.push(z);
    let mut steps: u64 = 0;
    loop {
        let gx: f64 = rng.sample(StandardNormal);
        let gy: f64 = rng.sample(StandardNormal);
        z += Complex64::new(sqrt_dt * gx, sqrt_dt * gy);
        path.push(z);
        steps += 1;
        if !cfg.domain.contains(z) {
            return Ok((path, true));
        }
        if steps >= cfg.max_steps {
            // The final point stays: it is inside, and excluding it (as the
            // time-change integral does with any last point) counts exactly
            // the steps walked.
            return Ok((path, false));
        }
    }
}

/// The conformal time-change clock along a discretized path:
/// `sum_k |m'(path[k])|^2 dt` over every point except the final (outside)
/// one. For a path run to its exit this approximates the exit time of the
/// image motion `m(B)` from `m(start)`.
pub fn time_change_integral(m: &ConformalMap, path: &[Complex64], dt: f64) -> Result<f64> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("step size must be positive and finite, got {dt}")));
    }
    let Some((_, inside)) = path.split_last() else {
        return Ok(0.0);
    };
    let mut sigma = 0.0;
    for &z in inside {
        sigma += m.derivative_abs_sq(z)? * dt;
    }
    Ok(sigma)
}

/// How a walk that exhausts its step budget is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CapBehavior {
    /// Surface [`Error::MaxStepsExceeded`]; correct for finite-mean exit
    /// times, where censoring would bias the estimate.
    Error,
    /// Keep the time accumulated so far; correct when the budget is an
    /// explicit time horizon (heavy-tailed exits from unbounded domains).
    Truncate,
}

/// Occupation measure of Brownian motion in the unit disk, started at `a`,
/// accumulated on `geometry` until each path exits. Time in a cell is counted
/// per step at the step's left endpoint, matching the exit-time convention of
/// [`walk_path`].
pub fn occupation_measure_disk(
    a: Complex64,
    dt: f64,
    geometry: GridGeometry,
    n_paths: u64,
    seed: u64,
) -> Result<OccupationGrid> {
    let cfg = PathConfig::new(dt, DEFAULT_MAX_STEPS, Domain::unit_disk(), a)?;
    occupation_run(&cfg, geometry, n_paths, seed, CapBehavior::Error)
}

/// Occupation measure over an arbitrary walk configuration, with
/// `cfg.max_steps` acting as a hard time horizon: paths still inside at the
/// budget contribute the time accumulated so far. Use this for domains whose
/// exit time has no mean; the horizon bias must then be argued by the caller.
pub fn occupation_measure_truncated(
    cfg: &PathConfig,
    geometry: GridGeometry,
    n_paths: u64,
    seed: u64,
) -> Result<OccupationGrid> {
    occupation_run(cfg, geometry, n_paths, seed, CapBehavior::Truncate)
}

fn occupation_run(
    cfg: &PathConfig,
    geometry: GridGeometry,
    n_paths: u64,
    seed: u64,
    cap: CapBehavior,
) -> Result<OccupationGrid> {
    geometry.validate()?;
    if n_paths == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let n_chunks = n_paths.div_ceil(CHUNK);
    let partials: Vec<Result<OccupationGrid>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n_paths);
            let cells = geometry.cells();
            let mut grid = OccupationGrid::zeroed(geometry)?;
            // Integer step counts per cell: converted once per path, so cell
            // times are exact multiples of dt with no accumulation drift.
            let mut counts: Vec<u64> = vec![0; cells];
            let mut cell_times: Vec<f64> = vec![0.0; cells];
            let sqrt_dt = cfg.dt.sqrt();
            for i in lo..hi {
                counts.fill(0);
                let mut inside_steps: u64 = 0;
                let mut rng = CounterRng::new(seed, i);
                let mut z = cfg.start;
                let mut steps: u64 = 0;
                loop {
                    if let Some(cell) = geometry.cell_index(z) {
                        counts[cell] += 1;
                    }
                    inside_steps += 1;
                    let gx: f64 = rng.sample(StandardNormal);
                    let gy: f64 = rng.sample(StandardNormal);
                    z += Complex64::new(sqrt_dt * gx, sqrt_dt * gy);
                    steps += 1;
                    if !cfg.domain.contains(z) {
                        break;
                    }
                    if steps >= cfg.max_steps {
                        match cap {
                            CapBehavior::Truncate => break,
                            CapBehavior::Error => {
                                return Err(Error::MaxStepsExceeded { max_steps: cfg.max_steps })
                            }
                        }
                    }
                }
                for (t, &k) in cell_times.iter_mut().zip(&counts) {
                    *t = k as f64 * cfg.dt;
                }
                grid.absorb_path(&cell_times, inside_steps as f64 * cfg.dt);
            }
            Ok(grid)
        })
        .collect();

    let mut acc = OccupationGrid::zeroed(geometry)?;
    for p in partials {
        acc.merge(&p?);
    }
    Ok(acc)
}

/// Deterministic parallel Monte Carlo mean of `per_path` over paths
/// `0..n`. Paths are grouped into fixed chunks; per-path values and their
/// squares are pairwise-summed within each chunk and the chunk partials are
/// folded in index order, so the bits do not depend on the worker count.
pub fn mc_mean<F>(n: u64, seed: u64, per_path: F) -> Result<McEstimate>
where
    F: Fn(RandomStreamKey) -> Result<f64> + Send + Sync,
{
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<Result<(f64, f64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            let mut vals = Vec::with_capacity((hi - lo) as usize);
            for i in lo..hi {
                vals.push(per_path(RandomStreamKey::new(seed, i))?);
            }
            let sqs: Vec<f64> = vals.iter().map(|v| v * v).collect();
            Ok((pairwise_sum(&vals), pairwise_sum(&sqs)))
        })
        .collect();

    let (mut sum, mut sum_sq) = (0.0_f64, 0.0_f64);
    for p in partials {
        let (s, q) = p?;
        sum += s;
        sum_sq += q;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let stderr = if n >= 2 {
        (((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) / nf).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(McEstimate { mean, stderr, n, seed })
}

/// Run `f` on a dedicated rayon pool of `workers` threads, or inline on the
/// ambient pool when `workers` is `None`. Results are worker-count invariant
/// by construction; this only controls scheduling width.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::Domain("worker count must be at least 1".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Domain(format!("thread pool construction failed: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
