//! Verification reports: one record per numeric check, serializable and
//! deterministic for a fixed seed and configuration.

use serde::{Deserialize, Serialize};

/// Outcome of one check: a computed value against its reference, with the
/// error split out and the tolerance that judged it.
///
/// `pass` is always `abs_error <= tolerance` (so a NaN computation fails),
/// and serialization round-trips losslessly. `runtime_ms` is the only field
/// that may differ between reruns of the same configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Short machine-friendly check name, unique within a command.
    pub name: String,
    /// The identity or quantity being checked, as a human-readable formula.
    pub anchor: String,
    pub computed: f64,
    pub reference: f64,
    pub abs_error: f64,
    /// `abs_error / |reference|`, or `abs_error` itself when the reference
    /// is zero.
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: f64,
    pub seed: u64,
    pub n: u64,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        anchor: impl Into<String>,
        computed: f64,
        reference: f64,
        tolerance: f64,
        runtime_ms: f64,
        seed: u64,
        n: u64,
    ) -> Self {
        let abs_error = (computed - reference).abs();
        let rel_error = if reference != 0.0 { abs_error / reference.abs() } else { abs_error };
        VerificationReport {
            name: name.into(),
            anchor: anchor.into(),
            computed,
            reference,
            abs_error,
            rel_error,
            tolerance,
            pass: abs_error <= tolerance,
            runtime_ms,
            seed,
            n,
        }
    }
}
