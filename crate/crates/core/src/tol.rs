//! Numeric tolerances shared across the crate.
//!
//! The underlying theory is exact; every threshold below is an artifact of
//! floating-point evaluation and is kept in one place so callers can scale
//! or override them consistently (the CLI exposes `QDUAL_TOL_SCALE`).

use crate::scalar::Scalar;

/// Tolerance bundle threaded through classification, feasibility and KKT
/// checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Base for the eigenvalue-zero band: an eigenvalue `w` of `M` counts
    /// as zero when `|w| ≤ def · max(1, ‖M‖₂)`.
    pub def: T,
    /// Range-membership test: `rhs ∈ Im M` iff the min-norm residual is
    /// `≤ rng · (‖M‖₂‖x‖ + ‖rhs‖ + 1)`.
    pub rng: T,
    /// Feasibility and multiplier-sign slack.
    pub feas: T,
    /// KKT condition slack (stationarity, complementarity, duality gap).
    pub kkt: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            def: T::of(1e-9),
            rng: T::of(1e-8),
            feas: T::of(1e-8),
            kkt: T::of(1e-7),
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    /// Default tolerances multiplied by a common factor.
    pub fn scaled(factor: T) -> Self {
        let base = Self::default();
        Tolerances {
            def: base.def * factor,
            rng: base.rng * factor,
            feas: base.feas * factor,
            kkt: base.kkt * factor,
        }
    }

    /// Eigenvalue-zero band for a matrix of the given spectral norm.
    #[inline]
    pub fn eig_zero_band(&self, spectral_norm: T) -> T {
        self.def * T::one().max(spectral_norm)
    }
}
