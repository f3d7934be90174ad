//! Numerical core for tracking interior transmission eigenvalues of homogeneous
//! scatterers as trajectories in the complex plane, parametrized by the index of
//! refraction.
//!
//! The crate is organized in layers:
//!
//! - [`specfun`]: cylindrical and spherical Bessel evaluation for complex argument,
//!   Hankel functions, and real Bessel roots. Everything above sits on this.
//! - [`diskball`]: closed-form transmission determinants for the unit disk and unit
//!   ball, their derivatives, trajectory velocity, eigenfunction coefficients, and
//!   the energy functional used for cross-checking computed eigenvalues.
//! - [`rootfind`]: argument-principle root counting and extraction on rectangles,
//!   plus Newton polishing with multiplicity monitoring.
//! - [`trajectory`]: predictor/corrector continuation in the refractive index,
//!   real-axis crossing detection and refinement, approach angles, recurrence
//!   prediction, the `1/n` symmetry map, and convergence diagnostics.
//! - [`geometry`] and [`mfs`]: boundary discretizations for general scatterers and
//!   the fundamental-solutions eigensolver (smallest singular value of a collocation
//!   matrix, minimized over complex wavenumbers).
//!
//! All arithmetic is `f64`-based; the crate root re-exports the concrete scalar and
//! complex aliases used throughout.

pub mod diskball;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mfs;
pub mod quad;
pub mod rootfind;
pub mod specfun;
pub mod trajectory;

/// Real scalar used throughout the crate.
pub type Real = f64;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

pub use error::CoreError;
