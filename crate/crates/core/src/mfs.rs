//! Sampled-boundary eigenvalue search for arbitrary planar scatterers.
//!
//! The two interior fields are represented by point-source sums anchored
//! outside the domain, and the matching conditions (equal trace, equal
//! normal derivative) are collocated at boundary samples. Eigenvalues are
//! the spectral parameters where some field pair matches on the boundary
//! while staying of unit size inside, so the misfit is a subspace angle:
//! stack boundary-mismatch rows on top of interior-probe rows,
//! orthonormalize the columns of the stack, and take the smallest singular
//! value of the boundary block. The quotient is essential. Point-source
//! bases are numerically very redundant, and the smallest singular value of
//! the boundary block alone collapses to rounding noise at every spectral
//! parameter; dividing out the interior size restores an order-one floor
//! away from eigenvalues. The interior probes also reject the spurious
//! dips where both fields vanish identically inside.
//!
//! The kernel is the second-kind cylinder function Y_0(kappa r) rather than
//! the outgoing combination H_0 = J_0 + i Y_0. Both solve the field
//! equation away from the source; Y_0 is chosen because it is real on the
//! positive real axis, so the assembled matrix at conj(kappa) is the
//! entrywise conjugate of the matrix at kappa and the misfit is an even
//! function of Im kappa. The outgoing kernel reflects to the incoming one
//! instead and has no such symmetry, so mirror trajectories computed with
//! it would disagree beyond rounding.

use crate::error::CoreError;
use crate::geometry::{BoundaryPoint, MfsLayout};
use crate::linalg::{orthonormal_range, smallest_singular_value, CMat};
use crate::specfun::{bessel_j, hankel1};
use crate::{C64, Real};

/// Relative pivot cutoff for the orthonormalization of the stacked
/// collocation matrix. Directions below this are basis redundancy, not
/// field content. The cutoff cannot sit near the rounding floor: pivots
/// down there are noise-dominated, their inclusion flips with the last
/// bits of the assembly, and the misfit inherits that jitter. Last-bit
/// input perturbations move the misfit by roughly eps divided by this
/// cutoff, so 1e-8 keeps the misfit stable to about 1e-8 while eigenvalue
/// dips still reach three orders of magnitude below every acceptance
/// threshold.
const RANGE_TOL: Real = 1e-8;

/// Y_0(k r) and its outward normal derivative at the boundary point, for a
/// source at `from`. One cylinder evaluation per kind serves both: the
/// derivative slot of order zero carries -Y_1.
fn source_terms(k: C64, from: [Real; 2], at: &BoundaryPoint) -> Result<(C64, C64), CoreError> {
    let dx = at.pos[0] - from[0];
    let dy = at.pos[1] - from[1];
    let r = (dx * dx + dy * dy).sqrt();
    if r == 0.0 {
        return Err(CoreError::SingularArgument);
    }
    let z = k * r;
    let h = hankel1(0, z)?;
    let j = bessel_j(0, z)?;
    let minus_i = C64 { re: 0.0, im: -1.0 };
    let value = (h.value - j.value) * minus_i;
    let slope = (h.derivative - j.derivative) * minus_i;
    let proj = (dx * at.normal[0] + dy * at.normal[1]) / r;
    Ok((value, k * slope * proj))
}

/// Y_0(k r) at a free interior point (no normal involved).
fn source_value(k: C64, from: [Real; 2], at: [Real; 2]) -> Result<C64, CoreError> {
    let dx = at[0] - from[0];
    let dy = at[1] - from[1];
    let r = (dx * dx + dy * dy).sqrt();
    if r == 0.0 {
        return Err(CoreError::SingularArgument);
    }
    let z = k * r;
    let h = hankel1(0, z)?;
    let j = bessel_j(0, z)?;
    Ok((h.value - j.value) * C64 { re: 0.0, im: -1.0 })
}

/// Stacked collocation matrix for the field pair at spectral parameter
/// `kappa` and index `n`.
///
/// Rows: m trace-matching conditions, m normal-derivative-matching
/// conditions, then m_I probes of the contrast-side field and m_I probes of
/// the background-side field at the interior nodes. Columns: one block of
/// source coefficients for the contrast side (wavenumber sqrt(n) kappa),
/// one for the background side (wavenumber kappa), the latter negated in
/// the matching rows.
pub fn assemble(layout: &MfsLayout, kappa: C64, n: Real) -> Result<CMat, CoreError> {
    if n <= 0.0 {
        return Err(CoreError::config("index must be positive"));
    }
    if kappa.norm() == 0.0 {
        return Err(CoreError::SingularArgument);
    }
    let m = layout.boundary.len();
    let mi = layout.interior.len();
    let cols = layout.sources.len();
    let mut a = CMat::zeros(2 * m + 2 * mi, 2 * cols);
    let k_contrast = kappa * n.sqrt();
    for (ci, src) in layout.sources.iter().enumerate() {
        for (bi, b) in layout.boundary.iter().enumerate() {
            let (w_val, w_der) = source_terms(k_contrast, *src, b)?;
            let (v_val, v_der) = source_terms(kappa, *src, b)?;
            a.set(bi, ci, w_val);
            a.set(bi, cols + ci, -v_val);
            a.set(m + bi, ci, w_der);
            a.set(m + bi, cols + ci, -v_der);
        }
        for (ii, y) in layout.interior.iter().enumerate() {
            a.set(2 * m + ii, ci, source_value(k_contrast, *src, *y)?);
            a.set(2 * m + mi + ii, cols + ci, source_value(kappa, *src, *y)?);
        }
    }
    Ok(a)
}

/// Single-field variant for interior Dirichlet eigenvalues of the shape:
/// m trace rows over m_I interior probes, one basis block.
pub fn assemble_dirichlet(layout: &MfsLayout, kappa: C64) -> Result<CMat, CoreError> {
    if kappa.norm() == 0.0 {
        return Err(CoreError::SingularArgument);
    }
    let m = layout.boundary.len();
    let mi = layout.interior.len();
    let cols = layout.sources.len();
    let mut a = CMat::zeros(m + mi, cols);
    for (ci, src) in layout.sources.iter().enumerate() {
        for (bi, b) in layout.boundary.iter().enumerate() {
            let (val, _) = source_terms(kappa, *src, b)?;
            a.set(bi, ci, val);
        }
        for (ii, y) in layout.interior.iter().enumerate() {
            a.set(m + ii, ci, source_value(kappa, *src, *y)?);
        }
    }
    Ok(a)
}

/// Smallest singular value of the boundary block after the columns of the
/// stacked matrix are orthonormalized. Lies in [0, 1]; order one away from
/// eigenvalues, dipping to the discretization floor at them.
fn boundary_angle(stacked: &CMat, boundary_rows: usize) -> Real {
    boundary_angle_with_tol(stacked, boundary_rows, RANGE_TOL)
}

#[doc(hidden)]
pub fn boundary_angle_with_tol(stacked: &CMat, boundary_rows: usize, tol: Real) -> Real {
    let mut a = stacked.clone();
    a.normalize_columns();
    let q = orthonormal_range(&a, tol);
    if q.cols() == 0 {
        return 1.0;
    }
    let top = CMat::from_fn(boundary_rows, q.cols(), |i, j| q.get(i, j));
    smallest_singular_value(&top)
}

/// Two-stage variant: each field's columns (with that field's interior
/// probe rows) are orthonormalized on their own before the joint angle is
/// taken, so the two blocks' very different numerical ranks cannot
/// contaminate each other.
#[doc(hidden)]
pub fn split_angle(
    stacked: &CMat,
    m: usize,
    mi: usize,
    cols: usize,
    tol1: Real,
    tol2: Real,
) -> Real {
    let mut aw = CMat::from_fn(2 * m + mi, cols, |i, j| {
        if i < 2 * m {
            stacked.get(i, j)
        } else {
            stacked.get(i, j)
        }
    });
    let mut av = CMat::from_fn(2 * m + mi, cols, |i, j| {
        if i < 2 * m {
            stacked.get(i, cols + j)
        } else {
            stacked.get(mi + i, cols + j)
        }
    });
    aw.normalize_columns();
    av.normalize_columns();
    let qw = orthonormal_range(&aw, tol1);
    let qv = orthonormal_range(&av, tol1);
    if qw.cols() == 0 || qv.cols() == 0 {
        return 1.0;
    }
    let joint = CMat::from_fn(2 * m + mi, qw.cols() + qv.cols(), |i, j| {
        if j < qw.cols() {
            qw.get(i, j)
        } else {
            qv.get(i, j - qw.cols())
        }
    });
    let q = orthonormal_range(&joint, tol2);
    if q.cols() == 0 {
        return 1.0;
    }
    let top = CMat::from_fn(2 * m, q.cols(), |i, j| q.get(i, j));
    smallest_singular_value(&top)
}

/// The matrix at conj(kappa) is the entrywise conjugate of the matrix at
/// kappa (real kernel on the real axis), so the misfit is an even function
/// of Im kappa. Evaluation goes through the upper-half-plane representative,
/// which turns that mathematical symmetry into an exact computational one:
/// mirror trajectories come out bitwise mirror images.
pub fn misfit(layout: &MfsLayout, kappa: C64, n: Real) -> Result<Real, CoreError> {
    let k = if kappa.im < 0.0 { kappa.conj() } else { kappa };
    let a = assemble(layout, k, n)?;
    Ok(boundary_angle(&a, 2 * layout.boundary.len()))
}

pub fn misfit_dirichlet(layout: &MfsLayout, kappa: C64) -> Result<Real, CoreError> {
    let k = if kappa.im < 0.0 { kappa.conj() } else { kappa };
    let a = assemble_dirichlet(layout, k)?;
    Ok(boundary_angle(&a, layout.boundary.len()))
}

#[derive(Debug, Clone)]
pub struct SearchControl {
    pub simplex_radius: Real,
    pub accept_misfit: Real,
    pub min_diameter: Real,
    pub max_evals: usize,
    /// Search wall: the misfit has a universal spurious dip at the origin,
    /// where both fields degenerate to the same harmonic function.
    /// Candidates below this modulus see a flat plateau instead.
    pub min_abs_kappa: Real,
}

impl Default for SearchControl {
    fn default() -> Self {
        SearchControl {
            simplex_radius: 0.05,
            accept_misfit: 1e-4,
            min_diameter: 1e-8,
            max_evals: 300,
            min_abs_kappa: 0.5,
        }
    }
}

/// Two-dimensional downhill simplex over (Re kappa, Im kappa). The landscape
/// near a dip is a cone, which the simplex handles without derivatives; the
/// result is accepted only if the dip is deep enough to be an eigenvalue
/// rather than a shallow saddle.
fn nelder_mead<F>(mut f: F, seed: C64, ctrl: &SearchControl) -> Result<C64, CoreError>
where
    F: FnMut(C64) -> Result<Real, CoreError>,
{
    let r = ctrl.simplex_radius;
    let mut simplex = [
        seed,
        seed + C64 { re: r, im: 0.0 },
        seed + C64 { re: 0.0, im: r },
    ];
    let mut values = [f(simplex[0])?, f(simplex[1])?, f(simplex[2])?];
    let mut evals = 3usize;
    while evals < ctrl.max_evals {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = [simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]];
        values = [values[idx[0]], values[idx[1]], values[idx[2]]];

        let diameter = (simplex[0] - simplex[1])
            .norm()
            .max((simplex[0] - simplex[2]).norm())
            .max((simplex[1] - simplex[2]).norm());
        if diameter < ctrl.min_diameter {
            break;
        }

        let centroid = (simplex[0] + simplex[1]) * 0.5;
        let reflected = centroid + (centroid - simplex[2]);
        let fr = f(reflected)?;
        evals += 1;
        if fr < values[0] {
            let expanded = centroid + (centroid - simplex[2]) * 2.0;
            let fe = f(expanded)?;
            evals += 1;
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] {
                centroid + (reflected - centroid) * 0.5
            } else {
                centroid + (simplex[2] - centroid) * 0.5
            };
            let fc = f(contracted)?;
            evals += 1;
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                simplex[1] = simplex[0] + (simplex[1] - simplex[0]) * 0.5;
                simplex[2] = simplex[0] + (simplex[2] - simplex[0]) * 0.5;
                values[1] = f(simplex[1])?;
                values[2] = f(simplex[2])?;
                evals += 2;
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    if values[best] < ctrl.accept_misfit {
        Ok(simplex[best])
    } else {
        Err(CoreError::MinimizerStalled {
            misfit: values[best],
            threshold: ctrl.accept_misfit,
        })
    }
}

/// Eigenvalue of the field pair nearest the seed, at fixed index.
pub fn find_ite(
    layout: &MfsLayout,
    n: Real,
    seed: C64,
    ctrl: &SearchControl,
) -> Result<C64, CoreError> {
    nelder_mead(
        |k| {
            if k.norm() < ctrl.min_abs_kappa {
                return Ok(1.0);
            }
            misfit(layout, k, n)
        },
        seed,
        ctrl,
    )
}

/// Interior Dirichlet eigenvalue near the seed: coarse scan of a bracket
/// around the seed, then golden-section refinement of the dip.
pub fn find_ide(layout: &MfsLayout, seed: Real, ctrl: &SearchControl) -> Result<Real, CoreError> {
    let half = (3.0 * ctrl.simplex_radius).max(0.05);
    let scan = 31usize;
    let mut best_k = seed;
    let mut best_v = Real::INFINITY;
    for i in 0..=scan {
        let k = seed - half + 2.0 * half * i as Real / scan as Real;
        if k <= 0.0 {
            continue;
        }
        let v = misfit_dirichlet(layout, C64 { re: k, im: 0.0 })?;
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let spacing = 2.0 * half / scan as Real;
    let mut lo = (best_k - spacing).max(1e-6);
    let mut hi = best_k + spacing;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = misfit_dirichlet(layout, C64 { re: x1, im: 0.0 })?;
    let mut f2 = misfit_dirichlet(layout, C64 { re: x2, im: 0.0 })?;
    while hi - lo > 1e-10 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = misfit_dirichlet(layout, C64 { re: x1, im: 0.0 })?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = misfit_dirichlet(layout, C64 { re: x2, im: 0.0 })?;
        }
    }
    let k = 0.5 * (lo + hi);
    let v = misfit_dirichlet(layout, C64 { re: k, im: 0.0 })?;
    if v < ctrl.accept_misfit {
        Ok(k)
    } else {
        Err(CoreError::MinimizerStalled {
            misfit: v,
            threshold: ctrl.accept_misfit,
        })
    }
}

/// March an eigenvalue of the field pair across an index range on a fixed
/// grid, re-minimizing at every step from a secant prediction. A stalled
/// step is retried with the interval halved (down to a sixteenth) before
/// the march gives up.
pub fn continue_ite(
    layout: &MfsLayout,
    seed: C64,
    n_start: Real,
    n_end: Real,
    dn: Real,
    ctrl: &SearchControl,
) -> Result<Vec<(Real, C64)>, CoreError> {
    if !(dn > 0.0) || (n_end - n_start).abs() < dn {
        return Err(CoreError::config("march interval shorter than one step"));
    }
    let dir = if n_end > n_start { 1.0 } else { -1.0 };
    let first = find_ite(layout, n_start, seed, ctrl)?;
    let mut out = vec![(n_start, first)];
    let step_ctrl = SearchControl {
        simplex_radius: 0.02,
        ..ctrl.clone()
    };
    let mut n = n_start;
    while (n_end - n) * dir > 1e-12 {
        let target = if (n_end - n) * dir < 1.5 * dn {
            n_end
        } else {
            n + dir * dn
        };
        let mut sub = target - n;
        loop {
            let next_n = n + sub;
            let (pn, pk) = *out.last().expect("seeded");
            let predicted = if out.len() >= 2 {
                let (qn, qk) = out[out.len() - 2];
                pk + (pk - qk) * ((next_n - pn) / (pn - qn))
            } else {
                pk
            };
            match find_ite(layout, next_n, predicted, &step_ctrl) {
                Ok(k) => {
                    out.push((next_n, k));
                    n = next_n;
                    break;
                }
                Err(CoreError::MinimizerStalled { misfit, threshold }) => {
                    if sub.abs() < dn / 16.0 {
                        return Err(CoreError::MinimizerStalled { misfit, threshold });
                    }
                    sub *= 0.5;
                }
                Err(other) => return Err(other),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{default_layout, layout_mfs, Shape};

    fn disk_layout() -> MfsLayout {
        let shape = Shape::Disk { radius: 1.0 };
        let (m, mi, ri, rs) = default_layout(&shape);
        layout_mfs(&shape, m, mi, ri, rs).unwrap()
    }

    #[test]
    fn matrices_have_the_advertised_shape() {
        let layout = disk_layout();
        let a = assemble(&layout, C64 { re: 3.0, im: 0.4 }, 4.0).unwrap();
        assert_eq!(a.rows(), 100);
        assert_eq!(a.cols(), 80);
        let d = assemble_dirichlet(&layout, C64 { re: 3.0, im: 0.0 }).unwrap();
        assert_eq!(d.rows(), 50);
        assert_eq!(d.cols(), 40);
    }

    #[test]
    fn misfit_is_conjugation_symmetric() {
        let layout = disk_layout();
        for (re, im) in [(3.0, 0.5), (2.2, 1.3), (5.0, 0.05)] {
            let up = misfit(&layout, C64 { re, im }, 4.0).unwrap();
            let down = misfit(&layout, C64 { re, im: -im }, 4.0).unwrap();
            assert!(up > 1e-3, "non-eigenvalue floor collapsed: {up:e}");
            assert!(up == down, "asymmetry at {re}+{im}i: {up} vs {down}");
        }
    }

    #[test]
    fn stalled_search_reports_the_floor() {
        let layout = disk_layout();
        // No eigenvalue anywhere near 1: the simplex bottoms out well above
        // the acceptance threshold.
        let err = find_ite(
            &layout,
            4.0,
            C64 { re: 1.0, im: 0.3 },
            &SearchControl {
                max_evals: 60,
                ..SearchControl::default()
            },
        );
        match err {
            Err(CoreError::MinimizerStalled { misfit, threshold }) => {
                assert!(misfit > threshold);
            }
            other => panic!("expected a stall, got {other:?}"),
        }
    }
}
