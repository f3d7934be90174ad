use crate::C64;

/// Errors shared across the numerical layers.
///
/// Variants carry enough context to act on programmatically: contour failures say
/// which bound was violated, non-convergence returns the iterate trail so a caller
/// can restart or shrink its step.
#[derive(Debug, Clone, thiserror::Error)]
pub enum CoreError {
    #[error("argument outside the validity window: {what}")]
    DomainError { what: String },

    #[error("singular evaluation at z = 0")]
    SingularArgument,

    #[error("contour passes too close to a root: min |f| = {min_abs:.3e} on the boundary, max |f| = {max_abs:.3e}")]
    ContourTooCloseToRoot { min_abs: f64, max_abs: f64 },

    #[error("estimated root count {count} exceeds the cluster limit {limit}; subdivide the box")]
    SubdivisionRequired { count: usize, limit: usize },

    #[error("iteration did not converge after {iterations} steps (last residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Iterate trail, most recent last.
        trail: Vec<C64>,
    },

    #[error("initial guess outside the attraction basin: |f| grew over the first iterations")]
    OutsideBasin,

    #[error("velocity blow-up: |J_p(kappa)| = {denom:.3e} at a near-real point; use the local crossing model")]
    VelocityBlowUp { denom: f64 },

    #[error("trajectory continuity violated: step {step:.3e} exceeds {limit:.3e} at n = {n}")]
    ContinuityViolation { n: f64, step: f64, limit: f64 },

    #[error("no closed-form interior Dirichlet reference for this scatterer")]
    UnsupportedShape,

    #[error("misfit minimizer stalled: best misfit {misfit:.3e} above acceptance {threshold:.3e}")]
    MinimizerStalled { misfit: f64, threshold: f64 },

    #[error("invalid configuration: {what}")]
    InvalidConfig { what: String },
}

impl CoreError {
    pub fn domain(what: impl Into<String>) -> Self {
        CoreError::DomainError { what: what.into() }
    }

    pub fn config(what: impl Into<String>) -> Self {
        CoreError::InvalidConfig { what: what.into() }
    }
}
