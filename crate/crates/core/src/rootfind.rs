//! Root counting and extraction for analytic functions on rectangles, built
//! on the argument principle: the contour integrals
//!
//!   s_k = (1/2 pi i) oint w(z)^k f'(z)/f(z) dz,   w(z) = (z - center)/rho,
//!
//! give the power sums of the enclosed roots (with multiplicity) in
//! box-centered coordinates. The count is s_0; the locations come from the
//! Prony recurrence satisfied by the power sums; multiplicities come from a
//! Vandermonde solve; everything is finished with multiplicity-aware Newton
//! on the original function and a moment-reproduction audit.

use crate::linalg::{singular_values, solve_dense, CMat};
use crate::quad::gauss_legendre;
use crate::{C64, CoreError, Real};

/// Axis-aligned rectangle in the complex plane.
#[derive(Clone, Copy, Debug)]
pub struct ContourBox {
    pub center: C64,
    pub half_width: Real,
    pub half_height: Real,
}

impl ContourBox {
    pub fn new(center: C64, half_width: Real, half_height: Real) -> Result<Self, CoreError> {
        if !(half_width > 0.0) || !(half_height > 0.0) {
            return Err(CoreError::config("contour box needs positive half-sizes"));
        }
        Ok(ContourBox { center, half_width, half_height })
    }

    pub fn contains(&self, z: C64) -> bool {
        (z.re - self.center.re).abs() <= self.half_width
            && (z.im - self.center.im).abs() <= self.half_height
    }

    /// Counterclockwise corner list starting at the bottom-left one.
    fn corners(&self) -> [C64; 4] {
        let c = self.center;
        let (a, b) = (self.half_width, self.half_height);
        [
            c + C64::new(-a, -b),
            c + C64::new(a, -b),
            c + C64::new(a, b),
            c + C64::new(-a, b),
        ]
    }

    fn scale(&self) -> Real {
        self.half_width.max(self.half_height)
    }
}

/// A root (or unresolvably tight knot of roots) with its total multiplicity.
#[derive(Clone, Copy, Debug)]
pub struct RootCluster {
    pub location: C64,
    pub multiplicity: u32,
}

/// Largest number of enclosed roots `locate_roots` resolves in one call;
/// boxes holding more must be subdivided by the caller.
pub const MAX_CLUSTER: usize = 8;

const NODES_PER_PANEL: usize = 20;
const CONTOUR_FLOOR: Real = 1e-12;

/// Result of one pass of contour integration.
struct MomentPass {
    moments: Vec<C64>,
    min_abs: Real,
    max_abs: Real,
}

fn integrate_moments<F, G>(
    f: &F,
    df: &G,
    bounds: &ContourBox,
    panels_per_edge: usize,
    count: usize,
) -> Result<MomentPass, CoreError>
where
    F: Fn(C64) -> Result<C64, CoreError>,
    G: Fn(C64) -> Result<C64, CoreError>,
{
    let (gl_nodes, gl_weights) = gauss_legendre(NODES_PER_PANEL);
    let corners = bounds.corners();
    let rho = bounds.scale();
    let mut moments = vec![C64::new(0.0, 0.0); count];
    let mut min_abs = Real::INFINITY;
    let mut max_abs: Real = 0.0;

    for edge in 0..4 {
        let from = corners[edge];
        let to = corners[(edge + 1) % 4];
        let step = (to - from) / panels_per_edge as Real;
        for panel in 0..panels_per_edge {
            let a = from + step * panel as Real;
            for (&t, &w) in gl_nodes.iter().zip(&gl_weights) {
                // Map [-1, 1] onto the panel.
                let z = a + step * (0.5 * (t + 1.0));
                let fv = f(z)?;
                let dv = df(z)?;
                let abs = fv.norm();
                min_abs = min_abs.min(abs);
                max_abs = max_abs.max(abs);
                if abs == 0.0 {
                    return Err(CoreError::ContourTooCloseToRoot { min_abs: 0.0, max_abs });
                }
                let base = dv * fv.finv() * step * (0.5 * w);
                let wz = (z - bounds.center) * (1.0 / rho);
                let mut pw = C64::new(1.0, 0.0);
                for slot in moments.iter_mut() {
                    *slot += base * pw;
                    pw *= wz;
                }
            }
        }
    }
    let two_pi_i = C64::new(0.0, std::f64::consts::TAU);
    for slot in moments.iter_mut() {
        *slot = *slot * two_pi_i.finv();
    }
    Ok(MomentPass { moments, min_abs, max_abs })
}

/// Integrates the first `count` moments, doubling the panel count until two
/// consecutive passes agree to 1e-9, and enforces the contour floor.
fn converged_moments<F, G>(
    f: &F,
    df: &G,
    bounds: &ContourBox,
    count: usize,
) -> Result<Vec<C64>, CoreError>
where
    F: Fn(C64) -> Result<C64, CoreError>,
    G: Fn(C64) -> Result<C64, CoreError>,
{
    let mut panels = 6usize;
    let mut prev = integrate_moments(f, df, bounds, panels, count)?;
    if prev.min_abs <= CONTOUR_FLOOR * prev.max_abs {
        return Err(CoreError::ContourTooCloseToRoot {
            min_abs: prev.min_abs,
            max_abs: prev.max_abs,
        });
    }
    // Four doublings: a zero sitting roughly a twentieth of an edge length
    // off the contour needs the 96-panel pass before the gap settles.
    for _ in 0..4 {
        panels *= 2;
        let next = integrate_moments(f, df, bounds, panels, count)?;
        let mut gap: Real = 0.0;
        for (a, b) in prev.moments.iter().zip(&next.moments) {
            gap = gap.max((a - b).norm());
        }
        prev = next;
        if gap <= 1e-9 {
            return Ok(prev.moments);
        }
    }
    Err(CoreError::NoConvergence {
        iterations: panels,
        residual: Real::NAN,
        trail: prev.moments,
    })
}

/// Number of roots of `f` strictly inside the box, counted with multiplicity.
pub fn count_roots<F, G>(f: F, df: G, bounds: &ContourBox) -> Result<u32, CoreError>
where
    F: Fn(C64) -> Result<C64, CoreError>,
    G: Fn(C64) -> Result<C64, CoreError>,
{
    let moments = converged_moments(&f, &df, bounds, 1)?;
    round_count(moments[0])
}

fn round_count(s0: C64) -> Result<u32, CoreError> {
    let rounded = s0.re.round();
    if (s0.re - rounded).abs() > 0.25 || s0.im.abs() > 0.25 || rounded < 0.0 {
        return Err(CoreError::NoConvergence {
            iterations: 0,
            residual: (s0 - C64::new(rounded, 0.0)).norm(),
            trail: vec![s0],
        });
    }
    Ok(rounded as u32)
}

/// Finds every root inside the box, with multiplicities. Contract:
/// - no root may sit on (or hug) the contour, enforced by a floor on |f|;
/// - at most [`MAX_CLUSTER`] roots inside, otherwise `SubdivisionRequired`
///   tells the caller to split the box and recurse;
/// - the returned clusters reproduce the contour moments to 1e-8, otherwise
///   the call fails loudly rather than returning a plausible-looking lie.
pub fn locate_roots<F, G>(f: F, df: G, bounds: &ContourBox) -> Result<Vec<RootCluster>, CoreError>
where
    F: Fn(C64) -> Result<C64, CoreError>,
    G: Fn(C64) -> Result<C64, CoreError>,
{
    let total = count_roots(&f, &df, bounds)? as usize;
    if total == 0 {
        return Ok(Vec::new());
    }
    if total > MAX_CLUSTER {
        return Err(CoreError::SubdivisionRequired { count: total, limit: MAX_CLUSTER });
    }
    let moments = converged_moments(&f, &df, bounds, 2 * total)?;

    // Distinct-root count = numerical rank of the Hankel matrix of power sums.
    let hankel = CMat::from_fn(total, total, |i, j| moments[i + j]);
    let sigma = singular_values(&hankel);
    let nu = sigma.iter().filter(|&&s| s > 1e-8 * sigma[0].max(1e-300)).count().max(1);

    // Monic polynomial with the distinct roots: Prony linear system.
    let locations_scaled = if nu == 1 {
        // One distinct root: first power sum over the count.
        vec![moments[1] / total as Real]
    } else {
        let a = CMat::from_fn(nu, nu, |i, j| moments[i + j]);
        let rhs: Vec<C64> = (0..nu).map(|i| -moments[nu + i]).collect();
        let coeffs = solve_dense(&a, &rhs)?;
        durand_kerner(&coeffs)?
    };

    // Multiplicities from the Vandermonde system over the power sums.
    let vand = CMat::from_fn(nu, nu, |k, i| locations_scaled[i].powu(k as u32));
    let raw = solve_dense(&vand, &moments[..nu])?;
    let mut mults = Vec::with_capacity(nu);
    let mut sum = 0u32;
    for (i, &m) in raw.iter().enumerate() {
        let rounded = m.re.round();
        if (m.re - rounded).abs() > 0.2 || m.im.abs() > 0.2 || rounded < 0.5 {
            return Err(CoreError::NoConvergence {
                iterations: 0,
                residual: (m - C64::new(rounded, 0.0)).norm(),
                trail: vec![locations_scaled[i], m],
            });
        }
        mults.push(rounded as u32);
        sum += rounded as u32;
    }
    if sum as usize != total {
        return Err(CoreError::NoConvergence {
            iterations: 0,
            residual: (sum as Real - total as Real).abs(),
            trail: locations_scaled,
        });
    }

    // Polish simple roots on the original function. Multiple roots are left
    // at their moment estimates: near an m-fold root the evaluation of f is
    // all cancellation below |x - root| ~ eps^(1/m), so pointwise iteration
    // can only damage the (smooth-integral, hence far more accurate) moment
    // location. The audit below still holds every cluster to account.
    let rho = bounds.scale();
    let mut clusters = Vec::with_capacity(nu);
    for (wz, &m) in locations_scaled.iter().zip(&mults) {
        let start = bounds.center + wz * rho;
        let location = if m == 1 {
            newton_polish_seeded(&f, &df, start, 1)?.root
        } else {
            start
        };
        clusters.push(RootCluster { location, multiplicity: m });
    }

    // Merge clusters that Newton collapsed onto the same point.
    clusters.sort_by(|x, y| {
        (x.location.re, x.location.im)
            .partial_cmp(&(y.location.re, y.location.im))
            .unwrap()
    });
    let mut merged: Vec<RootCluster> = Vec::with_capacity(clusters.len());
    for c in clusters {
        if let Some(last) = merged.last_mut() {
            if (last.location - c.location).norm() <= 1e-9 * (1.0 + c.location.norm()) {
                last.multiplicity += c.multiplicity;
                continue;
            }
        }
        merged.push(c);
    }

    // Audit: the polished clusters must reproduce the integrated moments.
    let mut worst: Real = 0.0;
    for (k, &s) in moments.iter().enumerate() {
        let mut recon = C64::new(0.0, 0.0);
        for c in &merged {
            let w = (c.location - bounds.center) * (1.0 / rho);
            recon += w.powu(k as u32) * c.multiplicity as Real;
        }
        worst = worst.max((recon - s).norm());
    }
    if worst > 1e-8 {
        return Err(CoreError::NoConvergence {
            iterations: 0,
            residual: worst,
            trail: merged.iter().map(|c| c.location).collect(),
        });
    }
    Ok(merged)
}

/// `locate_roots` with automatic subdivision: a box holding more roots than
/// one call can resolve is split along its longer side (with the seam nudged
/// off-center so it is unlikely to hit a root) and both halves are scanned
/// recursively. A seam that lands on or near a root shows up either as a
/// contour rejection or as stalled moments; both trigger a retry at a well
/// separated offset before giving up.
pub fn roots_in_window<F, G>(
    f: &F,
    df: &G,
    bounds: &ContourBox,
    max_depth: usize,
) -> Result<Vec<RootCluster>, CoreError>
where
    F: Fn(C64) -> Result<C64, CoreError>,
    G: Fn(C64) -> Result<C64, CoreError>,
{
    match locate_roots(f, df, bounds) {
        Ok(clusters) => Ok(clusters),
        Err(CoreError::SubdivisionRequired { .. }) if max_depth > 0 => {
            let mut last = None;
            for seam in [0.513, 0.431, 0.589] {
                let (left, right) = split_box(bounds, seam)?;
                let halves = roots_in_window(f, df, &left, max_depth - 1).and_then(|mut out| {
                    out.extend(roots_in_window(f, df, &right, max_depth - 1)?);
                    Ok(out)
                });
                match halves {
                    Err(
                        err @ (CoreError::ContourTooCloseToRoot { .. }
                        | CoreError::NoConvergence { .. }),
                    ) => last = Some(err),
                    other => return other,
                }
            }
            Err(last.expect("loop ran"))
        }
        Err(other) => Err(other),
    }
}

/// Splits along the longer side at the given fraction. Only the geometry can
/// fail here; the Result shape lets the caller thread retries through.
fn split_box(bounds: &ContourBox, frac: Real) -> Result<(ContourBox, ContourBox), CoreError> {
    let c = bounds.center;
    if bounds.half_width >= bounds.half_height {
        let w = bounds.half_width;
        let seam = c.re - w + 2.0 * w * frac;
        let left = ContourBox::new(
            C64::new(0.5 * (c.re - w + seam), c.im),
            0.5 * (seam - (c.re - w)),
            bounds.half_height,
        )?;
        let right = ContourBox::new(
            C64::new(0.5 * (seam + c.re + w), c.im),
            0.5 * (c.re + w - seam),
            bounds.half_height,
        )?;
        Ok((left, right))
    } else {
        let h = bounds.half_height;
        let seam = c.im - h + 2.0 * h * frac;
        let bottom = ContourBox::new(
            C64::new(c.re, 0.5 * (c.im - h + seam)),
            bounds.half_width,
            0.5 * (seam - (c.im - h)),
        )?;
        let top = ContourBox::new(
            C64::new(c.re, 0.5 * (seam + c.im + h)),
            bounds.half_width,
            0.5 * (c.im + h - seam),
        )?;
        Ok((bottom, top))
    }
}

/// All roots of the monic polynomial w^d + c[d-1] w^{d-1} + ... + c[0] by
/// Durand-Kerner iteration. The callers only pass polynomials with distinct
/// roots, where the iteration is reliable from the standard spiral start.
fn durand_kerner(coeffs: &[C64]) -> Result<Vec<C64>, CoreError> {
    let d = coeffs.len();
    let eval = |w: C64| -> C64 {
        let mut v = C64::new(1.0, 0.0);
        for k in (0..d).rev() {
            v = v * w + coeffs[k];
        }
        v
    };
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..d).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..500 {
        let mut biggest_move: Real = 0.0;
        for i in 0..d {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) * denom.finv();
            roots[i] -= step;
            biggest_move = biggest_move.max(step.norm());
        }
        if biggest_move <= 1e-14 {
            return Ok(roots);
        }
    }
    Err(CoreError::NoConvergence { iterations: 500, residual: Real::NAN, trail: roots })
}

/// Outcome of a Newton polish.
#[derive(Clone, Copy, Debug)]
pub struct Polished {
    pub root: C64,
    pub multiplicity: u32,
    pub iterations: u32,
    pub residual: Real,
}

/// Newton iteration from `start`, estimating the multiplicity as it goes and
/// accelerating with the m-fold step once the estimate stabilizes. Fails with
/// `OutsideBasin` when |f| has not dropped after the opening iterations.
pub fn newton_polish<F, G>(f: F, df: G, start: C64) -> Result<Polished, CoreError>
where
    F: Fn(C64) -> Result<C64, CoreError>,
    G: Fn(C64) -> Result<C64, CoreError>,
{
    newton_polish_seeded(&f, &df, start, 1)
}

fn newton_polish_seeded<F, G>(
    f: &F,
    df: &G,
    start: C64,
    multiplicity_guess: u32,
) -> Result<Polished, CoreError>
where
    F: Fn(C64) -> Result<C64, CoreError>,
    G: Fn(C64) -> Result<C64, CoreError>,
{
    const MAX_ITER: u32 = 50;
    let mut x = start;
    let mut m = multiplicity_guess.clamp(1, MAX_CLUSTER as u32);
    let mut trail: Vec<C64> = vec![x];
    let mut prev_abs = Real::INFINITY;
    let mut prev_x = x;
    let mut prev_move = Real::INFINITY;

    for it in 0..MAX_ITER {
        let fv = f(x)?;
        let abs = fv.norm();
        if abs > prev_abs {
            // The step made things worse. Close to an m-fold root the
            // evaluation of f is cancellation-limited and the iterates jitter
            // inside a ball of radius ~eps^(1/m); a small previous step means
            // that floor was reached, so the pre-jump iterate is the answer.
            let floor = 4.0 * f64::EPSILON.powf(1.0 / (m as Real + 1.0)) * (1.0 + prev_x.norm());
            if prev_move <= floor {
                return Ok(Polished {
                    root: prev_x,
                    multiplicity: m,
                    iterations: it,
                    residual: prev_abs,
                });
            }
            // A sizable step that grew |f| during the opening iterations is a
            // bad start, not a slow root.
            if it <= 3 {
                return Err(CoreError::OutsideBasin);
            }
            return Err(CoreError::NoConvergence { iterations: it as usize, residual: abs, trail });
        }
        let dv = df(x)?;
        if dv.norm() == 0.0 {
            return Err(CoreError::SingularArgument);
        }
        let newton = fv * dv.finv();
        let step = newton * m as Real;
        prev_x = x;
        prev_abs = abs;
        x -= step;
        trail.push(x);
        if trail.len() > 8 {
            trail.remove(0);
        }

        let moved = step.norm();
        if moved <= 1e-14 * (1.0 + x.norm()) {
            return Ok(Polished { root: x, multiplicity: m, iterations: it + 1, residual: abs });
        }
        // Plain Newton contracts a multiplicity-m root by (m-1)/m each step;
        // a stabilized contraction ratio therefore reveals m.
        if prev_move.is_finite() {
            let ratio = moved / prev_move.max(1e-300);
            if m == 1 && (0.35..0.97).contains(&ratio) {
                let est = (1.0 / (1.0 - ratio)).round();
                if (2.0..=MAX_CLUSTER as f64).contains(&est) {
                    m = est as u32;
                }
            }
        }
        prev_move = moved;
    }
    let residual = f(x).map(|v| v.norm()).unwrap_or(Real::NAN);
    Err(CoreError::NoConvergence { iterations: MAX_ITER as usize, residual, trail })
}
