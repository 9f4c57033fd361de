//! The planar domains whose exit behavior the crate studies.

use num_complex::Complex64;

/// Open planar domains, each with an exact strict-inequality membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `{ |z| < radius }`.
    Disk { radius: f64 },
    /// `{ 0 < |z| < 1 }`.
    PuncturedDisk,
    /// `{ Im z > 0 }`.
    HalfPlaneUpper,
    /// `{ Re z > 0 }`.
    HalfPlaneRight,
    /// `{ |Re z| < half_width }`.
    Strip { half_width: f64 },
    /// `{ |Re z| < pi/4 }`, the image of the unit disk under the principal arctangent.
    StripQuarterPi,
}

impl Domain {
    pub fn unit_disk() -> Self {
        Domain::Disk { radius: 1.0 }
    }

    pub fn unit_strip() -> Self {
        Domain::Strip { half_width: 1.0 }
    }

    /// Strict (open-set) membership. Boundary points are outside, and the
    /// puncture of `PuncturedDisk` is outside. Non-finite points are outside
    /// every domain.
    pub fn contains(&self, z: Complex64) -> bool {
        if !z.re.is_finite() || !z.im.is_finite() {
            return false;
        }
        match *self {
            Domain::Disk { radius } => z.norm_sqr() < radius * radius,
            Domain::PuncturedDisk => {
                let r2 = z.norm_sqr();
                r2 > 0.0 && r2 < 1.0
            }
            Domain::HalfPlaneUpper => z.im > 0.0,
            Domain::HalfPlaneRight => z.re > 0.0,
            Domain::Strip { half_width } => z.re.abs() < half_width,
            Domain::StripQuarterPi => z.re.abs() < std::f64::consts::FRAC_PI_4,
        }
    }

    /// Membership in the closure, with `slack` absorbing float error in points
    /// constructed to lie exactly on the boundary. Map evaluation uses this:
    /// exit densities and preimage sums are evaluated on boundary curves.
    pub fn contains_closure(&self, z: Complex64, slack: f64) -> bool {
        if !z.re.is_finite() || !z.im.is_finite() {
            return false;
        }
        match *self {
            Domain::Disk { radius } => z.norm() <= radius + slack,
            Domain::PuncturedDisk => z.norm() <= 1.0 + slack,
            Domain::HalfPlaneUpper => z.im >= -slack,
            Domain::HalfPlaneRight => z.re >= -slack,
            Domain::Strip { half_width } => z.re.abs() <= half_width + slack,
            Domain::StripQuarterPi => z.re.abs() <= std::f64::consts::FRAC_PI_4 + slack,
        }
    }
}
