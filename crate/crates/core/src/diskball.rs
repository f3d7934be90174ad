//! Transmission determinants for the unit disk and unit ball.
//!
//! For angular order p, a wavenumber kappa is an interior transmission
//! eigenvalue of the unit disk with constant index n exactly when
//!
//!   F_p(kappa, n) = kappa (J'_p(kappa) J_p(kappa sqrt n)
//!                   - sqrt(n) J_p(kappa) J'_p(kappa sqrt n)) = 0,
//!
//! and of the unit ball when the same expression with spherical j_p vanishes.
//! The partial derivatives collapse to short closed forms through the Bessel
//! differential equation; they hold identically, not only on the zero set,
//! which is what makes Newton corrections and crossing refinement cheap.

use crate::quad::gauss_legendre_on;
use crate::specfun::{bessel_j, bessel_real_roots, spherical_j};
use crate::{C64, CoreError, Real};

/// Determinant value with both partials and a magnitude reference.
///
/// `scale` is the larger of the two products making up the determinant, so
/// `value.norm() / scale` measures cancellation depth: it is O(1) away from
/// eigenvalues and tends to zero on the zero set.
#[derive(Clone, Copy, Debug)]
pub struct DetEval {
    pub value: C64,
    pub d_kappa: C64,
    pub d_n: C64,
    pub scale: Real,
}

/// A one-parameter family of transmission determinants, indexed by the
/// refractive index. Implemented by the disk and the ball; the continuation
/// machinery is written against this interface.
pub trait TransmissionDet {
    fn eval(&self, kappa: C64, n: Real) -> Result<DetEval, CoreError>;

    /// dkappa/dn along the trajectory through (kappa, n), in closed form.
    /// Fails with `VelocityBlowUp` when the leading factor of the kappa
    /// derivative is below the blow-up threshold, which on the zero set
    /// happens exactly when kappa sits at an interior Dirichlet eigenvalue.
    fn velocity(&self, kappa: C64, n: Real) -> Result<C64, CoreError>;

    fn order(&self) -> u32;

    /// Interior Dirichlet eigenvalues of the domain for this angular order,
    /// ascending. These are the only possible real-axis crossing points.
    fn interior_eigenvalues(&self, count: usize) -> Result<Vec<Real>, CoreError>;

    fn family_name(&self) -> &'static str;
}

/// |J_p(kappa)| (or spherical analog) below this makes the velocity formula
/// meaningless; trajectory code treats it as a crossing signal.
pub const VELOCITY_BLOWUP_THRESHOLD: Real = 1e-12;

fn check_inputs(kappa: C64, n: Real) -> Result<(), CoreError> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(CoreError::domain("index n must be positive and finite"));
    }
    if kappa.norm() == 0.0 {
        return Err(CoreError::domain("kappa = 0 is excluded"));
    }
    Ok(())
}

/// F_p(kappa, n) for the unit disk.
pub fn det_disk(p: u32, kappa: C64, n: Real) -> Result<C64, CoreError> {
    Ok(disk_parts(p, kappa, n)?.0)
}

/// f_p(kappa, n) for the unit ball.
pub fn det_ball(p: u32, kappa: C64, n: Real) -> Result<C64, CoreError> {
    Ok(ball_parts(p, kappa, n)?.0)
}

/// (value, inner eval at kappa, outer eval at kappa sqrt n, scale).
type Parts = (C64, crate::specfun::BesselEval, crate::specfun::BesselEval, Real);

fn disk_parts(p: u32, kappa: C64, n: Real) -> Result<Parts, CoreError> {
    check_inputs(kappa, n)?;
    let root_n = n.sqrt();
    let beta = kappa * root_n;
    let a = bessel_j(p, kappa)?;
    let b = bessel_j(p, beta)?;
    let t1 = kappa * a.derivative * b.value;
    let t2 = kappa * root_n * a.value * b.derivative;
    let scale = t1.norm().max(t2.norm()).max(Real::MIN_POSITIVE);
    Ok((t1 - t2, a, b, scale))
}

fn ball_parts(p: u32, kappa: C64, n: Real) -> Result<Parts, CoreError> {
    check_inputs(kappa, n)?;
    let root_n = n.sqrt();
    let beta = kappa * root_n;
    let a = spherical_j(p, kappa)?;
    let b = spherical_j(p, beta)?;
    let t1 = kappa * a.derivative * b.value;
    let t2 = kappa * root_n * a.value * b.derivative;
    let scale = t1.norm().max(t2.norm()).max(Real::MIN_POSITIVE);
    Ok((t1 - t2, a, b, scale))
}

#[derive(Clone, Copy, Debug)]
pub struct DiskDet {
    pub p: u32,
}

#[derive(Clone, Copy, Debug)]
pub struct BallDet {
    pub p: u32,
}

impl TransmissionDet for DiskDet {
    fn eval(&self, kappa: C64, n: Real) -> Result<DetEval, CoreError> {
        let p = self.p;
        let (value, a, b, scale) = disk_parts(p, kappa, n)?;
        let psq = (p * p) as f64;
        let d_kappa = kappa * a.value * b.value * (n - 1.0);
        let d_n = a.derivative * b.derivative * kappa * kappa / (2.0 * n.sqrt())
            + a.value * b.value * (kappa * kappa * n - psq) / (2.0 * n);
        Ok(DetEval { value, d_kappa, d_n, scale })
    }

    fn velocity(&self, kappa: C64, n: Real) -> Result<C64, CoreError> {
        let p = self.p;
        check_inputs(kappa, n)?;
        if n == 1.0 {
            return Err(CoreError::domain("velocity undefined at n = 1"));
        }
        let a = bessel_j(p, kappa)?;
        if a.value.norm() <= VELOCITY_BLOWUP_THRESHOLD {
            return Err(CoreError::VelocityBlowUp { denom: a.value.norm() });
        }
        let psq = (p * p) as f64;
        let c = 2.0 * n * (n - 1.0);
        let ratio = a.derivative * a.value.finv();
        Ok(-(kappa * kappa * n - psq) * (c * kappa).finv() - kappa * ratio * ratio / c)
    }

    fn order(&self) -> u32 {
        self.p
    }

    fn interior_eigenvalues(&self, count: usize) -> Result<Vec<Real>, CoreError> {
        bessel_real_roots(self.p, count)
    }

    fn family_name(&self) -> &'static str {
        "disk"
    }
}

impl TransmissionDet for BallDet {
    fn eval(&self, kappa: C64, n: Real) -> Result<DetEval, CoreError> {
        let p = self.p;
        let (value, a, b, scale) = ball_parts(p, kappa, n)?;
        let pp1 = (p * (p + 1)) as f64;
        let root_n = n.sqrt();
        let d_kappa = kappa * a.value * b.value * (n - 1.0) - value * kappa.finv();
        let d_n = a.derivative * b.derivative * kappa * kappa / (2.0 * root_n)
            + a.value * b.derivative * kappa / (2.0 * root_n)
            + a.value * b.value * (kappa * kappa * n - pp1) / (2.0 * n);
        Ok(DetEval { value, d_kappa, d_n, scale })
    }

    fn velocity(&self, kappa: C64, n: Real) -> Result<C64, CoreError> {
        let p = self.p;
        check_inputs(kappa, n)?;
        if n == 1.0 {
            return Err(CoreError::domain("velocity undefined at n = 1"));
        }
        let a = spherical_j(p, kappa)?;
        if a.value.norm() <= VELOCITY_BLOWUP_THRESHOLD {
            return Err(CoreError::VelocityBlowUp { denom: a.value.norm() });
        }
        let pp1 = (p * (p + 1)) as f64;
        let c = 2.0 * n * (n - 1.0);
        let ratio = a.derivative * a.value.finv();
        Ok(-(kappa * kappa * n - pp1) * (c * kappa).finv()
            - kappa * ratio * ratio / c
            - ratio / c)
    }

    fn order(&self) -> u32 {
        self.p
    }

    fn interior_eigenvalues(&self, count: usize) -> Result<Vec<Real>, CoreError> {
        spherical_real_roots(self.p, count)
    }

    fn family_name(&self) -> &'static str {
        "ball"
    }
}

/// Positive real roots of the spherical Bessel function j_p, ascending.
/// For p = 0 these are m pi exactly; the general scan mirrors the cylindrical
/// one (roots of consecutive index are interlaced and never closer than the
/// grid step used here).
pub fn spherical_real_roots(p: u32, count: usize) -> Result<Vec<Real>, CoreError> {
    if p > 60 {
        return Err(CoreError::domain("order above the supported window"));
    }
    if count == 0 || count > 100 {
        return Err(CoreError::domain("root count outside 1..=100"));
    }
    if p == 0 {
        return Ok((1..=count).map(|m| m as Real * std::f64::consts::PI).collect());
    }
    let eval = |x: Real| -> Real {
        spherical_j(p, C64::new(x, 0.0)).map(|e| e.value.re).unwrap_or(Real::NAN)
    };
    let mut roots = Vec::with_capacity(count);
    let step = std::f64::consts::FRAC_PI_4;
    let mut x0 = p as Real + 1.0;
    let mut f0 = eval(x0);
    let mut guard = 0usize;
    while roots.len() < count {
        let x1 = x0 + step;
        let f1 = eval(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let mut lo = x0;
            let mut hi = x1;
            let mut flo = f0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = eval(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
        guard += 1;
        if guard > 20_000 {
            return Err(CoreError::domain("spherical root scan ran away"));
        }
    }
    Ok(roots)
}

/// Amplitude of the inner field relative to the outer one, chosen so the two
/// fields match on the boundary. Both boundary conditions give the same value
/// on the zero set; the route with the larger denominator is used.
pub fn alpha_coefficient(p: u32, kappa: C64, n: Real) -> Result<C64, CoreError> {
    check_inputs(kappa, n)?;
    let root_n = n.sqrt();
    let beta = kappa * root_n;
    let a = bessel_j(p, kappa)?;
    let b = bessel_j(p, beta)?;
    let dirichlet_denom = b.value.norm();
    let neumann_denom = root_n * b.derivative.norm();
    if dirichlet_denom.max(neumann_denom) == 0.0 {
        return Err(CoreError::SingularArgument);
    }
    if dirichlet_denom >= neumann_denom {
        Ok(a.value * b.value.finv())
    } else {
        Ok(a.derivative * (b.derivative * root_n).finv())
    }
}

/// Angular integral of cos^2(p theta) over the circle.
fn angular_factor(p: u32) -> Real {
    if p == 0 {
        std::f64::consts::TAU
    } else {
        std::f64::consts::PI
    }
}

/// Integral of |v|^2 - n |w|^2 over the unit disk, where v = J_p(kappa r)
/// cos(p theta) and w = alpha J_p(sqrt(n) kappa r) cos(p theta) are the
/// eigenfunction pair attached to (kappa, n). At a genuine non-real
/// eigenvalue the integral vanishes; at a real one it equals the closed form
/// from `energy_closed_form_real`.
pub fn energy_mismatch(p: u32, kappa: C64, n: Real, radial_nodes: usize) -> Result<Real, CoreError> {
    check_inputs(kappa, n)?;
    if radial_nodes < 4 || radial_nodes > 1000 {
        return Err(CoreError::config("radial node count outside 4..=1000"));
    }
    let alpha = alpha_coefficient(p, kappa, n)?;
    let alpha_sq = alpha.norm_sqr();
    let root_n = n.sqrt();
    let (nodes, weights) = gauss_legendre_on(radial_nodes, 0.0, 1.0);
    let mut total = 0.0;
    for (&r, &w) in nodes.iter().zip(&weights) {
        let v = bessel_j(p, kappa * r)?.value;
        let wv = bessel_j(p, kappa * (root_n * r))?.value;
        total += w * r * (v.norm_sqr() - n * alpha_sq * wv.norm_sqr());
    }
    Ok(total * angular_factor(p))
}

/// Value of the energy integral at a real eigenvalue:
/// (1 - n)/2 * J_p(kappa)^2 times the angular factor.
pub fn energy_closed_form_real(p: u32, kappa: Real, n: Real) -> Result<Real, CoreError> {
    check_inputs(C64::new(kappa, 0.0), n)?;
    let j = bessel_j(p, C64::new(kappa, 0.0))?.value.re;
    Ok(0.5 * (1.0 - n) * j * j * angular_factor(p))
}

/// Residuals of the boundary-matching identities that hold at a recurrence
/// point (kappa and kappa sqrt(n) both interior Dirichlet eigenvalues): for
/// each adjacent order q the pair (values, scaled derivatives) of the two
/// fields must coincide. Returns the largest absolute residual over both
/// adjacent orders and both identities.
pub fn recurrence_residual(p: u32, kappa_star: Real, n_star: Real) -> Result<Real, CoreError> {
    check_inputs(C64::new(kappa_star, 0.0), n_star)?;
    let root_n = n_star.sqrt();
    let k1 = C64::new(kappa_star, 0.0);
    let k2 = k1 * root_n;
    let a = bessel_j(p, k1)?;
    let b = bessel_j(p, k2)?;
    let alpha = a.derivative * (b.derivative * root_n).finv();
    let mut worst: Real = 0.0;
    let adjacent: &[u32] = if p == 0 { &[1] } else { &[p - 1, p + 1] };
    for &q in adjacent {
        let uq = bessel_j(q, k1)?;
        let wq = bessel_j(q, k2)?;
        let value_gap = (uq.value - alpha * root_n * wq.value).norm();
        let deriv_gap = (uq.derivative - alpha * n_star * wq.derivative).norm();
        worst = worst.max(value_gap).max(deriv_gap);
    }
    Ok(worst)
}
