//! Statistical validation of the Monte Carlo layer against the exact laws,
//! plus the reproducibility guarantees the engine advertises.

use conformal_bm::map::ConformalMap;
use conformal_bm::occupation::GridGeometry;
use conformal_bm::oracle::greens_halfplane;
use conformal_bm::rng::RandomStreamKey;
use conformal_bm::sampler::{
    mc_mean, occupation_measure_disk, occupation_measure_truncated, sample_exit_disk,
    sample_exit_halfplane, sample_exit_strip, simulate_exit_time_1d, time_change_integral,
    walk_path, walk_path_truncated, with_workers, PathConfig, DEFAULT_MAX_STEPS,
};
use conformal_bm::stats::ks_test;
use conformal_bm::{Complex64, Domain};
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn halfplane_sampler_passes_ks_against_the_cauchy_cdf() {
    let v = 2.0;
    let xs: Vec<f64> = (0..20_000)
        .map(|i| sample_exit_halfplane(v, RandomStreamKey::new(0, i)).unwrap())
        .collect();
    let got = ks_test(&xs, |x| 0.5 + (x / v).atan() / PI).unwrap();
    assert!(got.p_value > 0.01, "p = {}", got.p_value);
}

#[test]
fn disk_sampler_passes_ks_against_the_closed_angle_cdf() {
    // For a real start a, the exit-angle CDF is
    // 1/2 + (1/pi) atan(((1+a)/(1-a)) tan(theta/2)) on (-pi, pi).
    let a = 0.5;
    let slope = (1.0 + a) / (1.0 - a);
    let angles: Vec<f64> = (0..20_000)
        .map(|i| sample_exit_disk(c(a, 0.0), RandomStreamKey::new(0, i)).unwrap().arg())
        .collect();
    let got = ks_test(&angles, |t| 0.5 + (slope * (t / 2.0).tan()).atan() / PI).unwrap();
    assert!(got.p_value > 0.01, "p = {}", got.p_value);
}

#[test]
fn strip_sampler_hits_the_walls_with_the_harmonic_split() {
    // P(exit through the right wall from a) is linear: (1 + a)/2.
    let a = 0.5;
    let n = 20_000u64;
    let hits = (0..n)
        .filter(|&i| sample_exit_strip(a, RandomStreamKey::new(0, i)).unwrap().re > 0.0)
        .count() as f64;
    let p_hat = hits / n as f64;
    let want = (1.0 + a) / 2.0;
    let sigma = (want * (1.0 - want) / n as f64).sqrt();
    assert!(
        (p_hat - want).abs() <= 3.0 * sigma,
        "p_hat = {p_hat}, want {want} +- {}",
        3.0 * sigma
    );
}

#[test]
fn exit_time_mean_matches_the_strip_formula_off_center() {
    let (h, a, dt) = (0.5, 0.2, 1e-5);
    let est = mc_mean(2000, 5, |key| simulate_exit_time_1d(h, a, dt, key)).unwrap();
    let want = h * h - a * a;
    // O(sqrt(dt)) exit-overshoot bias pushes the mean up by ~2e-3 here.
    let slack = 3.0 * est.stderr + 0.005;
    assert!(
        (est.mean - want).abs() <= slack,
        "mean {} vs {want} +- {slack}",
        est.mean
    );
}

#[test]
fn coarser_steps_bias_exit_times_upward() {
    // Exits are detected late by the overshoot past the wall, so the mean
    // grows with dt; the effect dwarfs the Monte Carlo noise at these sizes.
    let h = 0.25;
    let fine = mc_mean(4000, 1, |key| simulate_exit_time_1d(h, 0.0, 1e-3, key)).unwrap();
    let coarse = mc_mean(4000, 1, |key| simulate_exit_time_1d(h, 0.0, 4e-3, key)).unwrap();
    let gap = coarse.mean - fine.mean;
    let noise = (fine.stderr.powi(2) + coarse.stderr.powi(2)).sqrt();
    assert!(gap > 3.0 * noise, "gap {gap} vs noise {noise}");
}

#[test]
fn stderr_shrinks_like_the_square_root_of_n() {
    let run = |n| {
        mc_mean(n, 9, |key| simulate_exit_time_1d(1.0, 0.0, 1e-3, key))
            .unwrap()
            .stderr
    };
    let ratio = run(2000) / run(8000);
    assert!((1.6..2.4).contains(&ratio), "stderr ratio {ratio}");
}

#[test]
fn occupation_grids_are_bit_identical_across_worker_counts() {
    let run = |workers| {
        with_workers(workers, || {
            occupation_measure_disk(c(0.3, 0.1), 1e-3, GridGeometry::disk_default(), 3000, 0)
        })
        .unwrap()
        .unwrap()
    };
    let one = run(Some(1));
    let four = run(Some(4));
    for idx in 0..GridGeometry::disk_default().cells() {
        assert_eq!(one.cell_sum(idx), four.cell_sum(idx), "cell {idx}");
        assert_eq!(one.cell_stderr(idx), four.cell_stderr(idx), "cell {idx}");
    }
    assert_eq!(one.total_mean(), four.total_mean());
}

/// The clock of the strip-to-disk map turns strip exit times into disk exit
/// times: the mean of the transported clock must match the exact disk value
/// E[tau] = 1/2 from the center.
#[test]
fn tan_map_clock_reproduces_the_disk_exit_time() {
    let cfg = PathConfig::new(1e-3, DEFAULT_MAX_STEPS, Domain::unit_strip(), c(0.0, 0.0)).unwrap();
    let m = ConformalMap::Tan4;
    let est = mc_mean(2000, 12, |key| {
        let path = walk_path(&cfg, key)?;
        time_change_integral(&m, &path, cfg.dt)
    })
    .unwrap();
    // 3 sigma plus an allowance for the O(sqrt(dt)) discretization bias.
    let slack = 3.0 * est.stderr + 0.03;
    assert!(
        (est.mean - 0.5).abs() <= slack,
        "clock mean {} vs 0.5 +- {slack}",
        est.mean
    );
}

/// The same consistency through the exponential covering map: half-plane
/// walks from i, clocked by |d/dz exp(iz)|^2, must exit the punctured disk
/// in mean time (1 - e^{-2})/2, the puncture being invisible.
#[test]
fn exp_map_clock_reproduces_the_punctured_disk_exit_time() {
    // Horizon 1000 time units; the overshoot past it can still hold at most
    // the worst-case remaining disk time, ~ P(alive) * 1/2 ~ 0.013.
    let cfg = PathConfig::new(1e-3, 1_000_000, Domain::HalfPlaneUpper, c(0.0, 1.0)).unwrap();
    let m = ConformalMap::ExpWrap;
    let est = mc_mean(500, 4, |key| {
        let (path, _exited) = walk_path_truncated(&cfg, key)?;
        time_change_integral(&m, &path, cfg.dt)
    })
    .unwrap();
    let want = (1.0 - (-2.0_f64).exp()) / 2.0;
    let slack = 3.0 * est.stderr + 0.04;
    assert!(
        (est.mean - want).abs() <= slack,
        "clock mean {} vs {want} +- {slack}",
        est.mean
    );
}

/// Occupation against the Green's function on a half-plane window, off the
/// pole: each cell's mean time matches the quadrature of greens_halfplane,
/// and mirror cells agree with each other by symmetry.
#[test]
fn halfplane_occupation_matches_the_greens_quadrature() {
    let start = c(0.0, 3.0);
    let geometry =
        GridGeometry::HalfPlaneRect { x_min: -1.5, x_max: 1.5, y_max: 2.0, nx: 3, ny: 2 };
    let cfg = PathConfig::new(1e-3, 2_000_000, Domain::HalfPlaneUpper, start).unwrap();
    let grid = occupation_measure_truncated(&cfg, geometry, 1500, 0).unwrap();

    for idx in 0..geometry.cells() {
        let want = geometry
            .cell_quadrature(idx, |z| greens_halfplane(start, z).unwrap())
            .unwrap();
        let got = grid.cell_mean(idx);
        // 3 sigma, 5% quadrature-vs-walk systematic, 2e-3 horizon residue.
        let slack = 3.0 * grid.cell_stderr(idx) + 0.05 * want + 2e-3;
        assert!(
            (got - want).abs() <= slack,
            "cell {idx}: got {got}, want {want} +- {slack}"
        );
    }

    // x-mirror symmetry: cells (iy, ix) and (iy, 2-ix) estimate equal means.
    for iy in 0..2 {
        let left = grid.cell_mean(iy * 3);
        let right = grid.cell_mean(iy * 3 + 2);
        let noise =
            (grid.cell_stderr(iy * 3).powi(2) + grid.cell_stderr(iy * 3 + 2).powi(2)).sqrt();
        assert!(
            (left - right).abs() <= 3.0 * noise + 1e-12,
            "row {iy}: {left} vs {right}"
        );
    }
}

/// Disk occupation with the pole off center: inner cells match the Green's
/// quadrature. The outermost ring carries the O(sqrt(dt)) exit-overshoot
/// bias and is gated separately (at its own fixed tolerance) in the
/// acceptance suite, so it is excluded here.
#[test]
fn disk_occupation_matches_greens_quadrature_on_inner_cells() {
    let a = c(0.4, 0.2);
    let geometry = GridGeometry::disk_default();
    let grid = occupation_measure_disk(a, 1e-4, geometry, 20_000, 0).unwrap();
    let (angular, radial) = match geometry {
        GridGeometry::DiskPolar { angular, radial } => (angular, radial),
        _ => unreachable!(),
    };
    for idx in 0..angular * (radial - 1) {
        let want = geometry
            .cell_quadrature(idx, |z| {
                conformal_bm::oracle::greens_disk(a, z).unwrap()
            })
            .unwrap();
        let got = grid.cell_mean(idx);
        let slack = 3.0 * grid.cell_stderr(idx) + 0.05 * want + 2e-4;
        assert!(
            (got - want).abs() <= slack,
            "cell {idx}: got {got}, want {want} +- {slack}"
        );
    }
    // Total time is the exact exit-time mean (1 - |a|^2)/2 plus step bias.
    let want_total = (1.0 - a.norm_sqr()) / 2.0;
    let slack = 3.0 * grid.total_stderr() + 0.01;
    assert!(
        (grid.total_mean() - want_total).abs() <= slack,
        "total {} vs {want_total} +- {slack}",
        grid.total_mean()
    );
}
