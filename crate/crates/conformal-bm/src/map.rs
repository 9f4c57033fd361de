//! The closed catalog of conformal maps used by the exit-law identities, with
//! exact derivatives, inverses, preimage enumeration along boundary curves,
//! and the density-pushforward rule.
//!
//! If `B` exits a domain with boundary density `rho` per unit arclength on a
//! curve `gamma`, and `f` maps the domain onto another one, then the image
//! point `f(B_tau)` exits with density
//!
//! ```text
//! rho_image(w) = sum over z in f^{-1}(w) on gamma of rho(z) / |f'(z)|
//! ```
//!
//! ([`push_density`]). The catalog is a closed enum rather than a trait so the
//! preimage fibers stay exactly enumerable; only `ExpWrap` has a nontrivial
//! (infinite) fiber, truncated symmetrically in the winding index.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::Domain;
use crate::quad::{gl_composite, trapezoid_periodic};
use crate::{Error, Result};

/// Inputs this close to a pole or branch point are rejected.
pub const POLE_TOL: f64 = 1e-12;
/// Maximum distance from a curve at which a point still counts as on it.
pub const CURVE_TOL: f64 = 1e-10;
/// Slack for closure membership, absorbing float error in boundary points.
const CLOSURE_SLACK: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Circles and axis-parallel lines: the only boundary curves the exit laws
/// here live on. The curve parameter is the angle for circles (arclength
/// element `r dt`) and the free coordinate for lines (arclength element `dt`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Circle { radius: f64 },
    /// `{ Re z = x }`, parametrized by the imaginary part.
    VerticalLine { x: f64 },
    /// `{ Im z = y }`, parametrized by the real part.
    HorizontalLine { y: f64 },
}

impl Curve {
    pub fn unit_circle() -> Self {
        Curve::Circle { radius: 1.0 }
    }

    pub fn real_axis() -> Self {
        Curve::HorizontalLine { y: 0.0 }
    }

    pub fn point_at(&self, t: f64) -> Complex64 {
        match *self {
            Curve::Circle { radius } => Complex64::from_polar(radius, t),
            Curve::VerticalLine { x } => Complex64::new(x, t),
            Curve::HorizontalLine { y } => Complex64::new(t, y),
        }
    }

    /// Parameter of the curve point nearest to `z` (a projection; exact when
    /// `z` lies on the curve).
    pub fn param_of(&self, z: Complex64) -> f64 {
        match *self {
            Curve::Circle { .. } => z.arg(),
            Curve::VerticalLine { .. } => z.im,
            Curve::HorizontalLine { .. } => z.re,
        }
    }

    pub fn distance_to(&self, z: Complex64) -> f64 {
        match *self {
            Curve::Circle { radius } => (z.norm() - radius).abs(),
            Curve::VerticalLine { x } => (z.re - x).abs(),
            Curve::HorizontalLine { y } => (z.im - y).abs(),
        }
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance_to(z) <= tol
    }

    /// Arclength per unit of curve parameter.
    fn arclength_factor(&self) -> f64 {
        match *self {
            Curve::Circle { radius } => radius,
            _ => 1.0,
        }
    }
}

/// A nonnegative density with respect to arclength on a boundary curve,
/// queryable pointwise and integrable over the whole curve.
#[derive(Clone)]
pub struct BoundaryDensity {
    pub curve: Curve,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl BoundaryDensity {
    /// `density` maps the curve parameter (angle for circles, coordinate for
    /// lines) to a density per unit arclength. Circle densities must be
    /// `2 pi`-periodic in the parameter.
    pub fn new<F>(curve: Curve, density: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        BoundaryDensity {
            curve,
            density: Arc::new(density),
        }
    }

    pub fn at_param(&self, t: f64) -> f64 {
        (self.density)(t)
    }

    /// Density at a point of the curve (the point is projected onto the
    /// curve, so callers should pass points within [`CURVE_TOL`] of it).
    pub fn at_point(&self, z: Complex64) -> f64 {
        self.at_param(self.curve.param_of(z))
    }

    /// Total mass by quadrature. Circles integrate over a full period; lines
    /// integrate over `|t| <= ~5e8` via a tangent substitution, so a unit
    /// Cauchy-type exit law comes out within `1e-8` of 1, from below.
    pub fn total_mass(&self) -> f64 {
        match self.curve {
            Curve::Circle { radius } => {
                trapezoid_periodic(&|t| self.at_param(t) * radius, 0.0, 2.0 * PI, 8192)
            }
            _ => {
                // t = tan(u) stretches (-pi/2, pi/2) over the line; the window
                // delta keeps |t| below ~5e8 and the omitted tails of a unit
                // Cauchy density below ~1.3e-9 per unit of scale.
                let delta = 2e-9;
                let f = |u: f64| {
                    let c = u.cos();
                    self.at_param(u.tan()) / (c * c)
                };
                gl_composite(&f, -PI / 2.0 + delta, PI / 2.0 - delta, 128, 16)
            }
        }
    }
}

/// The closed map catalog. Each variant states its domain; evaluation is
/// permitted on the closure of that domain (boundary curves included) since
/// exit densities live on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConformalMap {
    /// `z -> tan(pi z / 4)`, the strip `{|Re z| < 1}` onto the unit disk.
    Tan4,
    /// `z -> -i (z-1)/(z+1)`, the right half-plane onto the unit disk.
    MobiusRightHalfToDisk,
    /// `z -> -i (z-1)/(z+1)`, the unit disk onto the upper half-plane
    /// (same formula, different domain), sending 0 to i.
    DiskToUpperHalf,
    /// `z -> (z-i)/(z+i)`, the upper half-plane onto the unit disk.
    UpperHalfToDisk,
    /// `z -> (z-a)/(1 - conj(a) z)`, the unit disk onto itself, sending a to 0.
    DiskAutomorphism { a: Complex64 },
    /// `z -> exp(i z)`, the upper half-plane onto the punctured unit disk
    /// (a covering map: the only non-injective entry).
    ExpWrap,
    /// `z -> v z` with `v > 0`.
    Scale { v: f64 },
    /// Principal-branch arctangent, the unit disk onto `{|Re z| < pi/4}`;
    /// the inverse of `Tan4` up to the factor-4 rescaling of the strip.
    ArcTan,
}

impl ConformalMap {
    /// The stated (open) domain of the map.
    pub fn domain(&self) -> Domain {
        match self {
            ConformalMap::Tan4 => Domain::unit_strip(),
            ConformalMap::MobiusRightHalfToDisk => Domain::HalfPlaneRight,
            ConformalMap::DiskToUpperHalf => Domain::unit_disk(),
            ConformalMap::UpperHalfToDisk => Domain::HalfPlaneUpper,
            ConformalMap::DiskAutomorphism { .. } => Domain::unit_disk(),
            ConformalMap::ExpWrap => Domain::HalfPlaneUpper,
            ConformalMap::Scale { .. } | ConformalMap::ArcTan => match self {
                ConformalMap::ArcTan => Domain::unit_disk(),
                // Scale is entire; the disk stands in as a placeholder only
                // where a domain is demanded, membership is never enforced.
                _ => Domain::Disk { radius: f64::INFINITY },
            },
        }
    }

    fn validate_params(&self) -> Result<()> {
        match *self {
            ConformalMap::DiskAutomorphism { a } => {
                if a.norm() < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "disk automorphism parameter must satisfy |a| < 1, got |a| = {}",
                        a.norm()
                    )))
                }
            }
            ConformalMap::Scale { v } => {
                if v.is_finite() && v > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("scale factor must be positive, got {v}")))
                }
            }
            _ => Ok(()),
        }
    }

    /// Distance from `z` to the nearest pole or branch point.
    fn pole_distance(&self, z: Complex64) -> f64 {
        match *self {
            // Poles of tan(pi z/4) sit at z = 2 + 4k on the real axis.
            ConformalMap::Tan4 => {
                let k = ((z.re - 2.0) / 4.0).round();
                (z - Complex64::new(2.0 + 4.0 * k, 0.0)).norm()
            }
            ConformalMap::MobiusRightHalfToDisk | ConformalMap::DiskToUpperHalf => {
                (z + 1.0).norm()
            }
            ConformalMap::UpperHalfToDisk => (z + I).norm(),
            ConformalMap::DiskAutomorphism { a } => {
                if a.norm_sqr() == 0.0 {
                    f64::INFINITY
                } else {
                    (z - 1.0 / a.conj()).norm()
                }
            }
            // Branch points of the principal arctangent.
            ConformalMap::ArcTan => (z - I).norm().min((z + I).norm()),
            ConformalMap::ExpWrap | ConformalMap::Scale { .. } => f64::INFINITY,
        }
    }

    fn check_input(&self, z: Complex64) -> Result<()> {
        self.validate_params()?;
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Domain(format!("non-finite input point {z}")));
        }
        if self.pole_distance(z) < POLE_TOL {
            return Err(Error::Pole { point: z });
        }
        let in_domain = match self {
            ConformalMap::Scale { .. } => true,
            _ => self.domain().contains_closure(z, CLOSURE_SLACK),
        };
        if !in_domain {
            return Err(Error::Domain(format!(
                "{z} is outside the closure of the map's domain {:?}",
                self.domain()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_input(z)?;
        Ok(match *self {
            ConformalMap::Tan4 => tan_saturating(FRAC_PI_4 * z),
            ConformalMap::MobiusRightHalfToDisk | ConformalMap::DiskToUpperHalf => {
                -I * (z - 1.0) / (z + 1.0)
            }
            ConformalMap::UpperHalfToDisk => (z - I) / (z + I),
            ConformalMap::DiskAutomorphism { a } => (z - a) / (1.0 - a.conj() * z),
            ConformalMap::ExpWrap => (I * z).exp(),
            ConformalMap::Scale { v } => v * z,
            ConformalMap::ArcTan => z.atan(),
        })
    }

    /// The analytic derivative `f'(z)`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_input(z)?;
        Ok(match *self {
            ConformalMap::Tan4 => {
                let u = FRAC_PI_4 * z;
                if u.im.abs() > 200.0 {
                    // sec^2 underflows past any representable double here.
                    Complex64::new(0.0, 0.0)
                } else {
                    let c = u.cos();
                    FRAC_PI_4 / (c * c)
                }
            }
            ConformalMap::MobiusRightHalfToDisk | ConformalMap::DiskToUpperHalf => {
                let d = z + 1.0;
                -2.0 * I / (d * d)
            }
            ConformalMap::UpperHalfToDisk => {
                let d = z + I;
                2.0 * I / (d * d)
            }
            ConformalMap::DiskAutomorphism { a } => {
                let d = 1.0 - a.conj() * z;
                (1.0 - a.norm_sqr()) / (d * d)
            }
            ConformalMap::ExpWrap => I * (I * z).exp(),
            ConformalMap::Scale { v } => Complex64::new(v, 0.0),
            ConformalMap::ArcTan => 1.0 / (1.0 + z * z),
        })
    }

    /// `|f'(z)|^2`, the local rate of the conformal time change: a Brownian
    /// path mapped through `f` runs at this many image-time units per unit of
    /// source time.
    pub fn derivative_abs_sq(&self, z: Complex64) -> Result<f64> {
        Ok(self.derivative(z)?.norm_sqr())
    }

    /// Inverse map, defined for every catalog entry except the covering map
    /// `ExpWrap` (use [`ConformalMap::preimages_on_curve`] there). Accepts `w`
    /// in the closure of the image.
    pub fn inverse(&self, w: Complex64) -> Result<Complex64> {
        self.validate_params()?;
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::Domain(format!("non-finite input point {w}")));
        }
        match *self {
            ConformalMap::Tan4 => {
                ConformalMap::ArcTan.check_input(w)?;
                Ok(4.0 / PI * w.atan())
            }
            ConformalMap::MobiusRightHalfToDisk => {
                check_closure(w, Domain::unit_disk(), (-I).into())?;
                Ok((1.0 + I * w) / (1.0 - I * w))
            }
            ConformalMap::DiskToUpperHalf => {
                check_closure(w, Domain::HalfPlaneUpper, (-I).into())?;
                Ok((1.0 + I * w) / (1.0 - I * w))
            }
            ConformalMap::UpperHalfToDisk => {
                check_closure(w, Domain::unit_disk(), Some(Complex64::new(1.0, 0.0)))?;
                Ok(I * (1.0 + w) / (1.0 - w))
            }
            ConformalMap::DiskAutomorphism { a } => {
                let pole = if a.norm_sqr() == 0.0 { None } else { Some(-1.0 / a.conj()) };
                check_closure(w, Domain::unit_disk(), pole)?;
                Ok((w + a) / (1.0 + a.conj() * w))
            }
            ConformalMap::ExpWrap => Err(Error::Domain(
                "exp(iz) is a covering map with no global inverse; enumerate preimages instead"
                    .into(),
            )),
            ConformalMap::Scale { v } => Ok(w / v),
            ConformalMap::ArcTan => {
                check_closure(w, Domain::StripQuarterPi, None)?;
                Ok(tan_saturating(w))
            }
        }
    }

    /// Image of a source curve under the map, for the (map, curve) pairs that
    /// occur in exit-law transport. Pairs without a circle-or-line image
    /// return `DomainError`.
    pub fn image_curve(&self, src: &Curve) -> Result<Curve> {
        self.validate_params()?;
        let unsupported = || {
            Err(Error::Domain(format!(
                "image of {src:?} under {self:?} is not a supported curve"
            )))
        };
        match (*self, *src) {
            (ConformalMap::Scale { v }, Curve::Circle { radius }) => {
                Ok(Curve::Circle { radius: v * radius })
            }
            (ConformalMap::Scale { v }, Curve::VerticalLine { x }) => {
                Ok(Curve::VerticalLine { x: v * x })
            }
            (ConformalMap::Scale { v }, Curve::HorizontalLine { y }) => {
                Ok(Curve::HorizontalLine { y: v * y })
            }
            (ConformalMap::ExpWrap, Curve::HorizontalLine { y }) => {
                Ok(Curve::Circle { radius: (-y).exp() })
            }
            (ConformalMap::DiskAutomorphism { .. }, Curve::Circle { radius })
                if radius == 1.0 =>
            {
                Ok(Curve::unit_circle())
            }
            (ConformalMap::UpperHalfToDisk, Curve::HorizontalLine { y }) if y == 0.0 => {
                Ok(Curve::unit_circle())
            }
            (ConformalMap::DiskToUpperHalf, Curve::Circle { radius }) if radius == 1.0 => {
                Ok(Curve::real_axis())
            }
            (ConformalMap::MobiusRightHalfToDisk, Curve::VerticalLine { x }) if x == 0.0 => {
                Ok(Curve::unit_circle())
            }
            (ConformalMap::Tan4, Curve::VerticalLine { x }) if x.abs() == 1.0 => {
                Ok(Curve::unit_circle())
            }
            _ => unsupported(),
        }
    }

    /// All preimages of `w` under the map, optionally restricted to a source
    /// curve.
    ///
    /// With `curve = Some(gamma)`: `w` must lie within [`CURVE_TOL`] of the
    /// image of `gamma`, and only fiber points on `gamma` are returned. For
    /// `ExpWrap` on a circle image these are the `2N+1` points
    /// `arg(w) + 2 pi k + i (-ln |w|)` for `|k| <= N`, in ascending `k` order.
    ///
    /// With `curve = None`: the unrestricted fiber (still truncated to
    /// `|k| <= N` for `ExpWrap`); invertible maps return the single preimage.
    pub fn preimages_on_curve(
        &self,
        w: Complex64,
        curve: Option<&Curve>,
        truncation: usize,
    ) -> Result<Vec<Complex64>> {
        if let Some(src) = curve {
            let image = self.image_curve(src)?;
            if !image.contains(w, CURVE_TOL) {
                return Err(Error::Domain(format!(
                    "{w} is at distance {} from the image curve {image:?}",
                    image.distance_to(w)
                )));
            }
        }
        if let ConformalMap::ExpWrap = self {
            let r = w.norm();
            if r <= 0.0 {
                return Err(Error::Domain("0 has no preimage under exp(iz)".into()));
            }
            let (theta, height) = (w.arg(), -r.ln());
            let n = truncation as i64;
            return Ok((-n..=n)
                .map(|k| Complex64::new(theta + 2.0 * PI * k as f64, height))
                .collect());
        }
        let z = self.inverse(w)?;
        match curve {
            Some(src) if !src.contains(z, CLOSURE_SLACK) => Ok(vec![]),
            _ => Ok(vec![z]),
        }
    }
}

/// `tan` with a saturation guard: for `|Im u| > 200` the closed form
/// overflows in intermediate `cosh` terms while the true value is within
/// one ulp of `+/- i`.
fn tan_saturating(u: Complex64) -> Complex64 {
    if u.im > 200.0 {
        I
    } else if u.im < -200.0 {
        -I
    } else {
        u.tan()
    }
}

fn check_closure(w: Complex64, image: Domain, pole: Option<Complex64>) -> Result<()> {
    if let Some(p) = pole {
        if (w - p).norm() < POLE_TOL {
            return Err(Error::Pole { point: w });
        }
    }
    if !image.contains_closure(w, CLOSURE_SLACK) {
        return Err(Error::Domain(format!(
            "{w} is outside the closure of the map's image {image:?}"
        )));
    }
    Ok(())
}

/// Transport of a boundary exit density through a map: the image density at
/// `w` is the sum of `rho(z) / |f'(z)|` over the preimages of `w` on the
/// source curve. Exact for invertible maps; for `ExpWrap` the fiber is
/// truncated to winding numbers `|k| <= truncation` and the result increases
/// monotonically towards the full sum as the truncation grows.
pub fn push_density(
    m: &ConformalMap,
    src: &BoundaryDensity,
    w: Complex64,
    truncation: usize,
) -> Result<f64> {
    let preimages = m.preimages_on_curve(w, Some(&src.curve), truncation)?;
    let mut sum = 0.0;
    for z in preimages {
        sum += src.at_point(z) / m.derivative(z)?.norm();
    }
    Ok(sum)
}

/// Quadrature of a (map, source density) pushforward over the full image
/// curve; mass 1 within quadrature error when the map is invertible and the
/// source has mass 1.
pub fn pushed_mass(m: &ConformalMap, src: &BoundaryDensity, truncation: usize) -> Result<f64> {
    let image = m.image_curve(&src.curve)?;
    let factor = image.arclength_factor();
    match image {
        Curve::Circle { .. } => {
            // Periodic trapezoid rule, written out so density errors propagate.
            let n = 8192;
            let h = 2.0 * PI / n as f64;
            let mut sum = 0.0;
            for j in 0..n {
                let t = j as f64 * h;
                sum += push_density(m, src, image.point_at(t), truncation)? * factor;
            }
            Ok(sum * h)
        }
        _ => {
            let pushed = BoundaryDensity::new(image, {
                let (m, src) = (*m, src.clone());
                move |t| push_density(&m, &src, image.point_at(t), truncation).unwrap_or(0.0)
            });
            Ok(pushed.total_mass())
        }
    }
}
