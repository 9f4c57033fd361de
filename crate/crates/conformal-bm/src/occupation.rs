//! Occupation-measure grids: how much time discretized paths spend where.
//!
//! The mean time a path from `a` spends in a cell `A` before leaving the
//! domain estimates the integral of the Green's function over `A`. Grids
//! carry per-cell sums and sums of squares across paths so cell means come
//! with standard errors.

use num_complex::Complex64;

use crate::quad::gauss_legendre;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridGeometry {
    /// Polar cells over the unit disk, radial edges uniform in `r`.
    DiskPolar { angular: usize, radial: usize },
    /// Uniform rectangular cells over the window `[x_min, x_max] x (0, y_max]`
    /// of the upper half-plane. Time outside the window is tracked only in
    /// the grid totals.
    HalfPlaneRect { x_min: f64, x_max: f64, y_max: f64, nx: usize, ny: usize },
}

impl GridGeometry {
    pub fn disk_default() -> Self {
        GridGeometry::DiskPolar { angular: 16, radial: 8 }
    }

    pub fn cells(&self) -> usize {
        match *self {
            GridGeometry::DiskPolar { angular, radial } => angular * radial,
            GridGeometry::HalfPlaneRect { nx, ny, .. } => nx * ny,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GridGeometry::DiskPolar { angular, radial } => angular >= 1 && radial >= 1,
            GridGeometry::HalfPlaneRect { x_min, x_max, y_max, nx, ny } => {
                nx >= 1 && ny >= 1 && x_max > x_min && y_max > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("degenerate grid geometry {self:?}")))
        }
    }

    /// Cell containing `z`, or `None` when `z` falls outside the grid.
    pub fn cell_index(&self, z: Complex64) -> Option<usize> {
        match *self {
            GridGeometry::DiskPolar { angular, radial } => {
                let r = z.norm();
                if r >= 1.0 {
                    return None;
                }
                let ir = ((r * radial as f64) as usize).min(radial - 1);
                // arg in (-pi, pi]; shift to [0, 2 pi) for binning.
                let theta = z.arg() + std::f64::consts::PI;
                let it = ((theta / (2.0 * std::f64::consts::PI) * angular as f64) as usize)
                    .min(angular - 1);
                Some(ir * angular + it)
            }
            GridGeometry::HalfPlaneRect { x_min, x_max, y_max, nx, ny } => {
                if z.re < x_min || z.re >= x_max || z.im <= 0.0 || z.im > y_max {
                    return None;
                }
                let ix = (((z.re - x_min) / (x_max - x_min) * nx as f64) as usize).min(nx - 1);
                let iy = (((y_max - z.im) / y_max * ny as f64) as usize).min(ny - 1);
                Some(iy * nx + ix)
            }
        }
    }

    /// Integral of `f` over the cell by tensor Gauss-Legendre quadrature
    /// (area element included, so constants integrate to the cell area).
    pub fn cell_quadrature<F: Fn(Complex64) -> f64>(&self, idx: usize, f: F) -> Result<f64> {
        if idx >= self.cells() {
            return Err(Error::Domain(format!(
                "cell {idx} out of range for {} cells",
                self.cells()
            )));
        }
        let order = 12;
        let (nodes, weights) = gauss_legendre(order);
        let map_to = |a: f64, b: f64, t: f64| 0.5 * (b - a) * t + 0.5 * (a + b);
        match *self {
            GridGeometry::DiskPolar { angular, radial } => {
                let (ir, it) = (idx / angular, idx % angular);
                let (r0, r1) = (ir as f64 / radial as f64, (ir + 1) as f64 / radial as f64);
                let two_pi = 2.0 * std::f64::consts::PI;
                let t0 = -std::f64::consts::PI + it as f64 / angular as f64 * two_pi;
                let t1 = t0 + two_pi / angular as f64;
                let mut sum = 0.0;
                for (i, &tr) in nodes.iter().enumerate() {
                    let r = map_to(r0, r1, tr);
                    for (j, &tt) in nodes.iter().enumerate() {
                        let theta = map_to(t0, t1, tt);
                        sum += weights[i] * weights[j] * f(Complex64::from_polar(r, theta)) * r;
                    }
                }
                Ok(sum * 0.25 * (r1 - r0) * (t1 - t0))
            }
            GridGeometry::HalfPlaneRect { x_min, x_max, y_max, nx, ny } => {
                let (iy, ix) = (idx / nx, idx % nx);
                let dx = (x_max - x_min) / nx as f64;
                let dy = y_max / ny as f64;
                let (x0, x1) = (x_min + ix as f64 * dx, x_min + (ix + 1) as f64 * dx);
                let (y1, y0) = (y_max - iy as f64 * dy, y_max - (iy + 1) as f64 * dy);
                let mut sum = 0.0;
                for (i, &tx) in nodes.iter().enumerate() {
                    let x = map_to(x0, x1, tx);
                    for (j, &ty) in nodes.iter().enumerate() {
                        let y = map_to(y0, y1, ty);
                        sum += weights[i] * weights[j] * f(Complex64::new(x, y));
                    }
                }
                Ok(sum * 0.25 * (x1 - x0) * (y1 - y0))
            }
        }
    }
}

/// Accumulated occupation times across paths: per-cell sums and sums of
/// squares of per-path cell times, plus the same for per-path totals.
#[derive(Debug, Clone)]
pub struct OccupationGrid {
    pub geometry: GridGeometry,
    sums: Vec<f64>,
    sum_sqs: Vec<f64>,
    total_sum: f64,
    total_sum_sq: f64,
    paths: u64,
}

impl OccupationGrid {
    pub fn zeroed(geometry: GridGeometry) -> Result<Self> {
        geometry.validate()?;
        Ok(OccupationGrid {
            geometry,
            sums: vec![0.0; geometry.cells()],
            sum_sqs: vec![0.0; geometry.cells()],
            total_sum: 0.0,
            total_sum_sq: 0.0,
            paths: 0,
        })
    }

    /// Fold one finished path's per-cell times (`cell_times[idx]`, total
    /// `total`, which may exceed the cell sum when the grid does not cover
    /// the whole domain) into the accumulators.
    pub fn absorb_path(&mut self, cell_times: &[f64], total: f64) {
        debug_assert_eq!(cell_times.len(), self.sums.len());
        for (i, &t) in cell_times.iter().enumerate() {
            self.sums[i] += t;
            self.sum_sqs[i] += t * t;
        }
        self.total_sum += total;
        self.total_sum_sq += total * total;
        self.paths += 1;
    }

    /// Merge another accumulator over disjoint paths into this one. Callers
    /// must merge in a fixed order for bit reproducibility.
    pub fn merge(&mut self, other: &OccupationGrid) {
        debug_assert_eq!(self.geometry, other.geometry);
        for (s, o) in self.sums.iter_mut().zip(&other.sums) {
            *s += o;
        }
        for (s, o) in self.sum_sqs.iter_mut().zip(&other.sum_sqs) {
            *s += o;
        }
        self.total_sum += other.total_sum;
        self.total_sum_sq += other.total_sum_sq;
        self.paths += other.paths;
    }

    pub fn paths(&self) -> u64 {
        self.paths
    }

    pub fn cell_sum(&self, idx: usize) -> f64 {
        self.sums[idx]
    }

    /// Mean time per path spent in the cell.
    pub fn cell_mean(&self, idx: usize) -> f64 {
        self.sums[idx] / self.paths as f64
    }

    pub fn cell_stderr(&self, idx: usize) -> f64 {
        stderr_of(self.sums[idx], self.sum_sqs[idx], self.paths)
    }

    /// Mean total lifetime per path (time anywhere, in or out of the grid).
    pub fn total_mean(&self) -> f64 {
        self.total_sum / self.paths as f64
    }

    pub fn total_stderr(&self) -> f64 {
        stderr_of(self.total_sum, self.total_sum_sq, self.paths)
    }

    /// Sum of the per-cell means; equals [`OccupationGrid::total_mean`] when
    /// the grid tiles the whole domain.
    pub fn cells_mean_sum(&self) -> f64 {
        self.sums.iter().sum::<f64>() / self.paths as f64
    }
}

fn stderr_of(sum: f64, sum_sq: f64, n: u64) -> f64 {
    if n < 2 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (var / nf).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_cells_tile_the_disk() {
        let g = GridGeometry::disk_default();
        assert_eq!(g.cells(), 128);
        // Every interior point lands in exactly one cell; boundary is out.
        for k in 1..500 {
            let k = k as f64;
            let z = Complex64::from_polar(
                0.999 * (k * 0.754877666246693).fract(),
                2.0 * PI * (k * 0.569840290998053).fract() - PI,
            );
            let idx = g.cell_index(z).unwrap();
            assert!(idx < g.cells());
        }
        assert_eq!(g.cell_index(c(1.0, 0.0)), None);
        assert_eq!(g.cell_index(c(0.8, 0.8)), None);
    }

    #[test]
    fn disk_cell_areas_sum_to_the_disk() {
        let g = GridGeometry::DiskPolar { angular: 16, radial: 8 };
        let total: f64 = (0..g.cells())
            .map(|i| g.cell_quadrature(i, |_| 1.0).unwrap())
            .sum();
        assert_relative_eq!(total, PI, max_relative = 1e-12);
        // Annulus area grows with radius: outermost ring is 15/64 of the disk.
        let outer: f64 = (112..128)
            .map(|i| g.cell_quadrature(i, |_| 1.0).unwrap())
            .sum();
        assert_relative_eq!(outer, PI * (1.0 - (7.0_f64 / 8.0).powi(2)), max_relative = 1e-12);
    }

    #[test]
    fn rect_cells_index_and_integrate() {
        let g = GridGeometry::HalfPlaneRect {
            x_min: -2.0,
            x_max: 2.0,
            y_max: 3.0,
            nx: 4,
            ny: 3,
        };
        assert_eq!(g.cells(), 12);
        assert_eq!(g.cell_index(c(-2.0, 3.0)), Some(0));
        assert_eq!(g.cell_index(c(1.9, 0.1)), Some(11));
        assert_eq!(g.cell_index(c(2.1, 1.0)), None);
        assert_eq!(g.cell_index(c(0.0, 3.1)), None);
        assert_eq!(g.cell_index(c(0.0, 0.0)), None);

        let total: f64 = (0..12).map(|i| g.cell_quadrature(i, |_| 1.0).unwrap()).sum();
        assert_relative_eq!(total, 12.0, max_relative = 1e-13);
        // A linear-in-y integrand over one cell, checked by hand.
        let got = g.cell_quadrature(0, |z| z.im).unwrap();
        assert_relative_eq!(got, 2.5, max_relative = 1e-13);
    }

    #[test]
    fn quadrature_matches_polar_hand_integral() {
        // f = r^2 over the whole disk integrates to pi/2.
        let g = GridGeometry::DiskPolar { angular: 8, radial: 4 };
        let total: f64 = (0..g.cells())
            .map(|i| g.cell_quadrature(i, |z| z.norm_sqr()).unwrap())
            .sum();
        assert_relative_eq!(total, PI / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn accumulator_statistics() {
        let g = GridGeometry::DiskPolar { angular: 2, radial: 1 };
        let mut grid = OccupationGrid::zeroed(g).unwrap();
        grid.absorb_path(&[1.0, 0.0], 1.0);
        grid.absorb_path(&[3.0, 2.0], 5.0);
        assert_eq!(grid.paths(), 2);
        assert_abs_diff_eq!(grid.cell_mean(0), 2.0, epsilon = 1e-15);
        // sd = sqrt(2), stderr = 1.
        assert_abs_diff_eq!(grid.cell_stderr(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(grid.total_mean(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(grid.cells_mean_sum(), 3.0, epsilon = 1e-15);

        let mut other = OccupationGrid::zeroed(g).unwrap();
        other.absorb_path(&[2.0, 2.0], 4.0);
        grid.merge(&other);
        assert_eq!(grid.paths(), 3);
        assert_abs_diff_eq!(grid.cell_mean(0), 2.0, epsilon = 1e-15);
    }
}
