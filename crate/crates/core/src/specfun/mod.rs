//! Bessel-family evaluation for complex argument: cylindrical `J_p`, spherical
//! `j_p`, Hankel `H^(1)_p`, and real roots of `J_p`.
//!
//! Evaluation strategy (cylindrical): Maclaurin series for `|z| <= 12`, backward
//! recurrence with normalization above. The normalizing identity is switched by
//! `|Im z|`: the even-order sum (whose exact value is 1) keeps real arguments
//! exactly real; away from the real axis a plane-wave sum of magnitude
//! `e^{|Im z|}` is used instead so the normalizer never suffers cancellation.
//! Hankel functions switch to their large-argument expansion beyond `|z| = 14`,
//! which is the only representation that stays relatively accurate in the upper
//! half-plane where `H^(1)` is exponentially small against `J` and `Y`.
//!
//! Derivatives always come from the recurrence ladder, never from finite
//! differences.
//!
//! Accuracy: about 1e-12 relative on the real axis, degrading smoothly to about
//! 1e-10 at `|Im z| = 5`. The public window is `p <= 60`, `|z| <= 200`; real-axis
//! root finding uses an internal path without the modulus cap.

mod cyl;
mod roots;
mod sph;

pub use roots::bessel_real_roots;

use crate::{C64, CoreError};

/// Value/derivative pair returned by the evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub value: C64,
    pub derivative: C64,
}

/// Largest order accepted by the public evaluators.
pub const MAX_ORDER: u32 = 60;

/// Largest `|z|` accepted by the public evaluators.
pub const MAX_ABS_Z: f64 = 200.0;

fn check_window(p: u32, z: C64) -> Result<(), CoreError> {
    if p > MAX_ORDER {
        return Err(CoreError::domain(format!("order {p} exceeds {MAX_ORDER}")));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(CoreError::domain("non-finite argument"));
    }
    if z.norm() > MAX_ABS_Z {
        return Err(CoreError::domain(format!(
            "|z| = {:.3} exceeds {MAX_ABS_Z}",
            z.norm()
        )));
    }
    Ok(())
}

/// Cylindrical Bessel function `J_p(z)` and its derivative.
pub fn bessel_j(p: u32, z: C64) -> Result<BesselEval, CoreError> {
    check_window(p, z)?;
    Ok(cyl::eval_j(p, z))
}

/// Spherical Bessel function `j_p(z)` and its derivative.
///
/// For `p = 0` this reduces to `sin(z)/z` evaluated directly.
pub fn spherical_j(p: u32, z: C64) -> Result<BesselEval, CoreError> {
    check_window(p, z)?;
    Ok(sph::eval_sph(p, z))
}

/// Hankel function of the first kind `H^(1)_p(z)` and its derivative.
///
/// Errors on `z = 0` (logarithmic singularity). Intended window: `Im z >= -5`
/// and moderate `|z|`; accuracy degrades with `e^{|Im z|}` cancellation for
/// small `|z|` far off the real axis.
pub fn hankel1(p: u32, z: C64) -> Result<BesselEval, CoreError> {
    check_window(p, z)?;
    if z == C64::new(0.0, 0.0) {
        return Err(CoreError::SingularArgument);
    }
    Ok(cyl::eval_h1(p, z))
}

pub(crate) use cyl::eval_j as eval_j_unchecked;
