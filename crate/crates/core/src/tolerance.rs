//! The single degeneracy threshold shared by the kinematics, the Legendre
//! inverse and the equations of motion.
//!
//! A configuration is degenerate when `|λ² − μ²| < tol · max(λ², μ²)`.
//! There θ is undefined and the canonical denominators `(λ² − μ²)` vanish.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

static DEGENERACY_TOL_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Current relative degeneracy threshold.
pub fn degeneracy_tolerance() -> f64 {
    f64::from_bits(DEGENERACY_TOL_BITS.load(Ordering::Relaxed))
}

/// Overrides the process-wide threshold. Intended to be called once at
/// start-up (the CLI maps `FLATBODY_EPS` onto it).
pub fn set_degeneracy_tolerance(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("degeneracy tolerance must be positive and finite, got {tol}")));
    }
    DEGENERACY_TOL_BITS.store(tol.to_bits(), Ordering::Relaxed);
    Ok(())
}

/// Fails with [`Error::Degenerate`] when the two in-plane stretches are too close.
pub fn check_nondegenerate<T: Scalar>(lambda: T, mu: T) -> Result<()> {
    let (l2, m2) = (lambda.sq(), mu.sq());
    let gap = (l2 - m2).abs();
    let threshold = T::of(degeneracy_tolerance()) * l2.max(m2);
    if gap < threshold || !gap.is_finite() {
        return Err(Error::Degenerate {
            gap: gap.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
        });
    }
    Ok(())
}
