//! Numerical toolkit around the conformal invariance of planar Brownian motion.
//!
//! A planar Brownian motion started inside a domain exits it with a computable
//! boundary law, spends a computable expected time inside, and occupies regions
//! in proportion to the domain's Green's function. Conformal maps transport all
//! three between domains, and writing the transported quantities down for a few
//! concrete maps (disk automorphisms, the Cayley map, `tan`, `exp`) produces a
//! family of classical series and product identities, all of which evaluate the
//! Basel sum `1 + 1/4 + 1/9 + ... = pi^2/6` along different routes.
//!
//! The crate provides:
//!
//! * exact evaluators for the exit densities and Green's functions involved
//!   ([`oracle`]),
//! * truncated series and product evaluators with explicit tail bounds
//!   ([`series`]),
//! * a deterministic Monte Carlo sampler for exit points, exit times and
//!   occupation measures ([`sampler`], [`occupation`]), and
//! * the goodness-of-fit statistics used to compare the two ([`stats`]).
//!
//! Conventions, fixed across the crate:
//!
//! * Brownian motion has independent coordinates of variance `t` each, so the
//!   exit time of the unit disk from the center has mean `1/2` and the exit
//!   time of a strip of half-width `h` started at distance `a` from the center
//!   line has mean `h^2 - a^2`.
//! * Boundary exit densities are taken per unit arclength.
//! * Green's functions carry the `1/pi` normalization, i.e.
//!   `G(a, z) = (1/pi) ln |1 - conj(a) z| / |z - a|` on the unit disk.

pub mod domain;
pub mod map;
pub mod occupation;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod series;
pub mod stats;

pub use num_complex::Complex64;

pub use domain::Domain;
pub use map::{BoundaryDensity, ConformalMap, Curve};
pub use report::VerificationReport;
pub use sampler::McEstimate;

/// Errors shared by every module: all preconditions surface as values, never
/// as panics, so callers can drive the evaluators from unchecked input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input outside the stated domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation point within `1e-12` of a pole or branch point of a map.
    #[error("pole error: {point} is within 1e-12 of a pole of the map")]
    Pole { point: Complex64 },

    /// Green's function evaluated on its diagonal.
    #[error("singularity error: source and evaluation point coincide to 1e-14")]
    Singularity,

    /// Too few samples for the requested statistic.
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Chi-square binning with too few bins or too small expected counts.
    #[error("bin underflow: {0}")]
    BinUnderflow(String),

    /// A simulated path failed to exit within the step budget.
    #[error("max steps exceeded: path still inside after {max_steps} steps")]
    MaxStepsExceeded { max_steps: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
