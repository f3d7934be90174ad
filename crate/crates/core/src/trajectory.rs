//! Continuation of determinant zeros in the index parameter.
//!
//! A trajectory is the curve n -> kappa(n) traced by one zero of a
//! `TransmissionDet` as the index moves away from the seed value. The marcher
//! is a predictor/corrector loop: the closed-form velocity (or a secant when
//! the velocity is unavailable) predicts the next position, a damped Newton
//! iteration in kappa corrects it, and the step size adapts to the corrector's
//! effort. Near an interior eigenvalue of the Laplacian the zero collides with
//! the real axis; there the velocity blows up and the local model
//!
//!   (kappa - kappa*)^3 = C (n - n*),   C = -3 kappa* / (2 n* (n* - 1))
//!
//! takes over: the marcher refines the touch point, records it as an event,
//! and re-enters the complex plane on the outgoing cube-root branch.

use crate::diskball::TransmissionDet;
use crate::error::CoreError;
use crate::rootfind::{roots_in_window, ContourBox};
use crate::{C64, Real};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub n: Real,
    pub kappa: C64,
}

/// A real-axis touch: the zero meets the axis at `kappa_star` when the index
/// passes `n_star`. `touch_index` is the position of the inserted on-axis
/// point inside `Trajectory::points`, so the neighbours on either side are the
/// incoming and outgoing samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub n_star: Real,
    pub kappa_star: Real,
    pub touch_index: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub events: Vec<CrossingEvent>,
}

/// Marching policy. `mandatory` lists index values the marcher must land on
/// exactly (they come out bitwise equal in the output); a mandatory value
/// closer than 2e-3 to a detected axis touch is dropped, since no meaningful
/// sample exists inside the collision zone.
#[derive(Debug, Clone)]
pub struct StepControl {
    pub initial_step: Real,
    pub min_step: Real,
    pub max_step: Real,
    pub max_newton: usize,
    pub easy_newton: usize,
    pub hard_newton: usize,
    pub growth: Real,
    pub continuity_factor: Real,
    pub crossing_im_window: Real,
    pub crossing_re_window: Real,
    pub mandatory: Vec<Real>,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            initial_step: 0.01,
            min_step: 1e-5,
            max_step: 0.1,
            max_newton: 12,
            easy_newton: 3,
            hard_newton: 5,
            growth: 1.25,
            continuity_factor: 5.0,
            crossing_im_window: 0.05,
            crossing_re_window: 0.3,
            mandatory: Vec::new(),
        }
    }
}

impl StepControl {
    fn validate(&self) -> Result<(), CoreError> {
        if !(self.min_step > 0.0 && self.min_step <= self.initial_step && self.initial_step <= self.max_step) {
            return Err(CoreError::config("step sizes must satisfy 0 < min <= initial <= max"));
        }
        if self.growth < 1.0 || self.continuity_factor <= 1.0 {
            return Err(CoreError::config("growth must be >= 1 and continuity factor > 1"));
        }
        if self.max_newton == 0 || self.easy_newton >= self.hard_newton {
            return Err(CoreError::config("newton iteration budgets are inconsistent"));
        }
        Ok(())
    }
}

/// Mandatory values dropped because they fell inside a crossing collision zone
/// are this close (in n) to the refined touch.
const MANDATORY_DROP_MARGIN: Real = 2e-3;

fn cube_coefficient(kappa_star: Real, n_star: Real) -> Real {
    -3.0 * kappa_star / (2.0 * n_star * (n_star - 1.0))
}

/// Newton in kappa at fixed index. Converges when the update stalls at the
/// rounding floor; the iteration count feeds the step controller.
fn correct<D: TransmissionDet>(
    det: &D,
    n: Real,
    start: C64,
    max_iter: usize,
) -> Result<(C64, usize), CoreError> {
    let mut kappa = start;
    let mut prev = Real::INFINITY;
    for it in 1..=max_iter {
        let eval = det.eval(kappa, n)?;
        let step = eval.value * eval.d_kappa.finv();
        if !step.re.is_finite() || !step.im.is_finite() {
            return Err(CoreError::NoConvergence {
                iterations: it,
                residual: eval.value.norm(),
                trail: vec![kappa],
            });
        }
        kappa -= step;
        let moved = step.norm();
        // Quadratic phase done: either the update reached the rounding floor,
        // or it sits within a few digits of it and has stopped shrinking.
        // Near a real-axis touch the derivative collapses like the offset
        // squared, which lifts the floor well above the tight threshold; an
        // update that no longer halves is rounding noise, not progress.
        if moved <= 1e-13 * (1.0 + kappa.norm())
            || (moved <= 1e-9 * (1.0 + kappa.norm()) && moved >= 0.5 * prev)
        {
            return Ok((kappa, it));
        }
        prev = moved;
    }
    Err(CoreError::NoConvergence {
        iterations: max_iter,
        residual: Real::NAN,
        trail: vec![kappa],
    })
}

/// |det| at the point, relative to the determinant's factor scale. On-axis
/// touch points are excluded by the caller: both factors vanish there and the
/// quotient stops meaning anything.
pub fn point_residual<D: TransmissionDet>(
    det: &D,
    point: &TrajectoryPoint,
) -> Result<Real, CoreError> {
    let eval = det.eval(point.kappa, point.n)?;
    Ok(eval.value.norm() / eval.scale.max(Real::MIN_POSITIVE))
}

/// Smallest-real-part zero of the determinant inside the given rectangle at
/// index `n0`, Newton-tightened. The imaginary lower edge must be positive:
/// real zeros belong to other trajectories and would swamp the scan. A zero
/// sitting near the window boundary stalls the contour quadrature, so the
/// scan retries with slightly displaced edges before giving up.
pub fn seed_smallest_re<D: TransmissionDet>(
    det: &D,
    n0: Real,
    re_range: (Real, Real),
    im_range: (Real, Real),
) -> Result<TrajectoryPoint, CoreError> {
    if !(re_range.0 < re_range.1 && im_range.0 < im_range.1 && im_range.0 > 0.0) {
        return Err(CoreError::config("seed window must be a rectangle off the real axis"));
    }
    let f = |z: C64| det.eval(z, n0).map(|e| e.value);
    let df = |z: C64| det.eval(z, n0).map(|e| e.d_kappa);
    let jitters: [(Real, Real, Real, Real); 4] = [
        (0.0, 0.0, 0.0, 0.0),
        (0.019, -0.013, 0.007, -0.011),
        (-0.023, 0.017, -0.009, 0.013),
        (0.031, 0.029, 0.013, 0.017),
    ];
    let mut last_err = CoreError::domain("empty seed window");
    for (a, b, c, d) in jitters {
        let re_lo = re_range.0 + a;
        let re_hi = re_range.1 + b;
        let im_lo = (im_range.0 + c).max(0.25 * im_range.0);
        let im_hi = im_range.1 + d;
        let window = ContourBox::new(
            C64::new(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)),
            0.5 * (re_hi - re_lo),
            0.5 * (im_hi - im_lo),
        )?;
        match roots_in_window(&f, &df, &window, 6) {
            Ok(clusters) => {
                let best = clusters
                    .iter()
                    .filter(|c| c.location.im >= 0.5 * im_range.0)
                    .min_by(|a, b| a.location.re.total_cmp(&b.location.re))
                    .ok_or_else(|| CoreError::domain("no determinant zero in the seed window"))?;
                let (kappa, _) = correct(det, n0, best.location, 30)?;
                return Ok(TrajectoryPoint { n: n0, kappa });
            }
            Err(err @ (CoreError::NoConvergence { .. } | CoreError::ContourTooCloseToRoot { .. })) => {
                last_err = err;
            }
            Err(other) => return Err(other),
        }
    }
    Err(last_err)
}

/// Locks a touch point to machine precision from a nearby guess, using the
/// determinant alone: 2-d Newton on (det = 0, d det/d kappa = 0) over real
/// (kappa, n). The Jacobian needs second derivatives, taken as central
/// differences of the analytic first derivative; it degenerates exactly at
/// the solution, so the iteration is damped and allowed to creep linearly,
/// and the index is finished with a 1-d Newton polish on the value alone,
/// whose n-derivative stays O(1) at the touch.
pub fn refine_crossing<D: TransmissionDet>(
    det: &D,
    kappa0: Real,
    n0: Real,
) -> Result<(Real, Real), CoreError> {
    let mut kappa = kappa0;
    let mut n = n0;
    let h = 1e-6;
    for _ in 0..100 {
        let e = det.eval(C64::new(kappa, 0.0), n)?;
        let g1 = e.value.re;
        let g2 = e.d_kappa.re;
        let f_n = e.d_n.re;
        let ep = det.eval(C64::new(kappa + h, 0.0), n)?;
        let em = det.eval(C64::new(kappa - h, 0.0), n)?;
        let f_kk = (ep.d_kappa.re - em.d_kappa.re) / (2.0 * h);
        let enp = det.eval(C64::new(kappa, 0.0), n + h)?;
        let enm = det.eval(C64::new(kappa, 0.0), n - h)?;
        let f_kn = (enp.d_kappa.re - enm.d_kappa.re) / (2.0 * h);
        let det_j = g2 * f_kn - f_n * f_kk;
        if det_j.abs() < 1e-300 {
            break;
        }
        let dk = (g1 * f_kn - g2 * f_n) / det_j;
        let dn = (g2 * g2 - f_kk * g1) / det_j;
        let damp = (dk.abs() / 0.05).max(dn.abs() / 0.1).max(1.0);
        kappa -= dk / damp;
        n -= dn / damp;
        if !(kappa.is_finite() && n.is_finite()) || n <= 0.0 {
            return Err(CoreError::NoConvergence {
                iterations: 0,
                residual: g1.abs(),
                trail: vec![C64::new(kappa, n)],
            });
        }
        if dk.abs() <= 1e-11 * (1.0 + kappa.abs()) && dn.abs() <= 1e-11 * (1.0 + n.abs()) {
            break;
        }
    }
    for _ in 0..4 {
        let e = det.eval(C64::new(kappa, 0.0), n)?;
        let step = e.value.re / e.d_n.re;
        if !step.is_finite() {
            break;
        }
        n -= step;
    }
    let e = det.eval(C64::new(kappa, 0.0), n)?;
    let drifted = (kappa - kappa0).abs() > 0.2 || (n - n0).abs() > 0.5;
    if drifted || e.value.re.abs() > 1e-8 * (1.0 + e.scale) {
        return Err(CoreError::NoConvergence {
            iterations: 100,
            residual: e.value.re.abs(),
            trail: vec![C64::new(kappa, n)],
        });
    }
    Ok((kappa, n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recurrence {
    pub n_star: Real,
    pub kappa_star: Real,
}

/// Index values at which a trajectory pinned to the `base_index`-th interior
/// eigenvalue returns to the axis, for indices above one: the squared ratios
/// of later eigenvalues to the base one. `base_index` is 1-based.
pub fn predict_recurrences<D: TransmissionDet>(
    det: &D,
    base_index: usize,
    count: usize,
) -> Result<Vec<Recurrence>, CoreError> {
    if base_index == 0 || count == 0 {
        return Err(CoreError::config("base index is 1-based and count must be positive"));
    }
    let ides = det.interior_eigenvalues(base_index + count)?;
    let base = ides[base_index - 1];
    Ok((1..=count)
        .map(|k| Recurrence {
            n_star: (ides[base_index - 1 + k] / base).powi(2),
            kappa_star: base,
        })
        .collect())
}

/// Image of `predict_recurrences` under the reciprocal-index map: touches of
/// the branch below index one, at reciprocal indices and rescaled positions.
pub fn predict_inverse_recurrences<D: TransmissionDet>(
    det: &D,
    base_index: usize,
    count: usize,
) -> Result<Vec<Recurrence>, CoreError> {
    let direct = predict_recurrences(det, base_index, count)?;
    Ok(direct
        .iter()
        .map(|r| Recurrence {
            n_star: 1.0 / r.n_star,
            kappa_star: r.kappa_star * r.n_star.sqrt(),
        })
        .collect())
}

/// (n, kappa) -> (1/n, sqrt(n) kappa). Zeros map to zeros: the determinant
/// picks up only a sign under this substitution.
pub fn symmetry_map(point: &TrajectoryPoint) -> TrajectoryPoint {
    TrajectoryPoint {
        n: 1.0 / point.n,
        kappa: point.kappa * point.n.sqrt(),
    }
}

fn wrap_to_pi(a: Real) -> Real {
    let mut x = a;
    while x > PI {
        x -= 2.0 * PI;
    }
    while x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Angles of the trajectory at a touch, both as seen from the touch point
/// (ray angles of kappa(n) - kappa*) and as motion directions (angles of
/// dkappa/dn). Everything is extrapolated to the touch in the natural local
/// variable t = |n - n*|^(1/3); velocities come from divided differences of
/// the recorded points, so the estimate needs no determinant access.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate {
    pub ray_in: Real,
    pub ray_out: Real,
    pub velocity_in: Real,
    pub velocity_out: Real,
}

/// Polynomial extrapolation of an angle sequence to t = 0. The angles are
/// unwrapped against the first (closest) sample before fitting; up to three
/// samples give a quadratic fit, which is exact for the pure cube law and
/// kills the leading local correction otherwise.
fn extrapolate_angle_to_zero(samples: &[(Real, Real)]) -> Real {
    let (_, th1) = samples[0];
    let unwrapped: Vec<(Real, Real)> = samples
        .iter()
        .take(3)
        .map(|&(t, th)| (t, th1 + wrap_to_pi(th - th1)))
        .collect();
    let mut value = 0.0;
    for (i, &(ti, thi)) in unwrapped.iter().enumerate() {
        let mut weight = 1.0;
        for (j, &(tj, _)) in unwrapped.iter().enumerate() {
            if i != j {
                weight *= tj / (tj - ti);
            }
        }
        value += weight * thi;
    }
    wrap_to_pi(value)
}

fn side_angles(side: &[TrajectoryPoint], n_star: Real, star: C64) -> Result<(Real, Real), CoreError> {
    if side.len() < 2 {
        return Err(CoreError::domain("too few samples on one side of a touch"));
    }
    let rays: Vec<(Real, Real)> = side
        .iter()
        .take(3)
        .map(|p| ((p.n - n_star).abs().cbrt(), (p.kappa - star).arg()))
        .collect();
    let mut velocities = Vec::new();
    for pair in side.windows(2).take(3) {
        let v = (pair[0].kappa - pair[1].kappa) / (pair[0].n - pair[1].n);
        let t_mid = (0.5 * (pair[0].n + pair[1].n) - n_star).abs().cbrt();
        velocities.push((t_mid, v.arg()));
    }
    Ok((
        extrapolate_angle_to_zero(&rays),
        extrapolate_angle_to_zero(&velocities),
    ))
}

pub fn estimate_approach_angle(
    traj: &Trajectory,
    event_index: usize,
) -> Result<AngleEstimate, CoreError> {
    let ev = traj
        .events
        .get(event_index)
        .ok_or_else(|| CoreError::config("event index out of range"))?;
    let star = C64::new(ev.kappa_star, 0.0);
    if ev.touch_index == 0 || ev.touch_index + 1 >= traj.points.len() {
        return Err(CoreError::domain("touch has no neighbours on both sides"));
    }
    let incoming: Vec<TrajectoryPoint> = traj.points[..ev.touch_index]
        .iter()
        .rev()
        .take(4)
        .copied()
        .collect();
    let outgoing: Vec<TrajectoryPoint> = traj.points[ev.touch_index + 1..]
        .iter()
        .take(4)
        .copied()
        .collect();
    let (ray_in, velocity_in) = side_angles(&incoming, ev.n_star, star)?;
    let (ray_out, velocity_out) = side_angles(&outgoing, ev.n_star, star)?;
    Ok(AngleEstimate {
        ray_in,
        ray_out,
        velocity_in,
        velocity_out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStat {
    pub n_low: Real,
    pub n_high: Real,
    pub max_im: Real,
}

/// Tail behaviour of a finished trajectory: per-window peaks of |Im kappa|
/// and, over the final quarter of the march, the distance from kappa to the
/// nearest interior eigenvalue. The assertions live with the callers; this
/// only measures.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub windows: Vec<WindowStat>,
    pub peaks_non_increasing_after: Option<Real>,
    pub tail_ide_distance: Vec<(Real, Real)>,
}

pub fn convergence_diagnostics<D: TransmissionDet>(
    det: &D,
    traj: &Trajectory,
    window_width: Real,
) -> Result<DiagnosticsReport, CoreError> {
    if traj.points.is_empty() {
        return Err(CoreError::domain("empty trajectory"));
    }
    if !(window_width > 0.0) {
        return Err(CoreError::config("window width must be positive"));
    }
    let n_min = traj.points.iter().map(|p| p.n).fold(Real::INFINITY, Real::min);
    let n_max = traj.points.iter().map(|p| p.n).fold(Real::NEG_INFINITY, Real::max);
    let count = (((n_max - n_min) / window_width).ceil() as usize).max(1);
    let mut windows: Vec<WindowStat> = (0..count)
        .map(|i| WindowStat {
            n_low: n_min + window_width * i as Real,
            n_high: (n_min + window_width * (i + 1) as Real).min(n_max),
            max_im: 0.0,
        })
        .collect();
    for p in &traj.points {
        let idx = (((p.n - n_min) / window_width) as usize).min(count - 1);
        windows[idx].max_im = windows[idx].max_im.max(p.kappa.im.abs());
    }
    let mut boundary = None;
    for start in 0..windows.len() {
        let tail = &windows[start..];
        if tail.windows(2).all(|w| w[1].max_im <= w[0].max_im + 1e-12) {
            boundary = Some(windows[start].n_low);
            break;
        }
    }
    let ides = det.interior_eigenvalues(32)?;
    let from = traj.points.len() - traj.points.len() / 4 - 1;
    let tail_ide_distance = traj.points[from..]
        .iter()
        .map(|p| {
            let d = ides
                .iter()
                .map(|&r| (p.kappa - C64::new(r, 0.0)).norm())
                .fold(Real::INFINITY, Real::min);
            (p.n, d)
        })
        .collect();
    Ok(DiagnosticsReport {
        windows,
        peaks_non_increasing_after: boundary,
        tail_ide_distance,
    })
}

/// March a zero from `seed` to index `n_end`, recording every accepted point
/// and every real-axis touch along the way. Both march directions work, but
/// the whole run must stay on one side of index one, where the determinant
/// family degenerates.
pub fn continue_trajectory<D: TransmissionDet>(
    det: &D,
    seed: TrajectoryPoint,
    n_end: Real,
    ctrl: &StepControl,
) -> Result<Trajectory, CoreError> {
    ctrl.validate()?;
    if seed.n <= 0.0 || n_end <= 0.0 || (seed.n - 1.0) * (n_end - 1.0) <= 0.0 {
        return Err(CoreError::config("march must stay strictly on one side of index one"));
    }
    if (seed.n - n_end).abs() < 1e-12 {
        return Err(CoreError::config("march interval is empty"));
    }
    let dir: Real = if n_end > seed.n { 1.0 } else { -1.0 };

    let mut mandatory: Vec<Real> = ctrl
        .mandatory
        .iter()
        .copied()
        .filter(|m| (m - seed.n) * dir > 0.0 && (n_end - m) * dir > 0.0)
        .collect();
    mandatory.sort_by(|a, b| if dir > 0.0 { a.total_cmp(b) } else { b.total_cmp(a) });
    mandatory.dedup();
    let mut m_idx = 0usize;

    let hints = det.interior_eigenvalues(24)?;
    // Local crossing geometry around a point: the nearest hint, the offset
    // u from it, and the engagement radius in u. The radius covers both the
    // incoming branch at |Im u| below the configured window and, for strong
    // cube coefficients, enough distance that the touch is still at least a
    // few minimum steps ahead in n when detection fires.
    let assess = |kappa: C64, n: Real| -> (Real, C64, Real, Real) {
        let hint = hints
            .iter()
            .copied()
            .min_by(|a, b| (kappa.re - a).abs().total_cmp(&(kappa.re - b).abs()))
            .expect("hint table is never empty");
        let u = kappa - C64::new(hint, 0.0);
        let c_abs = cube_coefficient(hint, n).abs();
        let u_window = (ctrl.crossing_im_window / 0.86).max((3.0 * ctrl.min_step * c_abs).cbrt());
        (hint, u, c_abs, u_window)
    };

    let (kappa0, _) = correct(det, seed.n, seed.kappa, ctrl.max_newton.max(20))?;
    let mut points = vec![TrajectoryPoint { n: seed.n, kappa: kappa0 }];
    let mut events: Vec<CrossingEvent> = Vec::new();
    let im_sign: Real = if kappa0.im >= 0.0 { 1.0 } else { -1.0 };
    let mut step = ctrl.initial_step;

    'march: loop {
        let here = *points.last().expect("at least the seed");
        if (n_end - here.n) * dir <= 1e-14 * n_end.abs().max(1.0) {
            break;
        }

        // Step cap from crossing proximity: inside the cube-law zone the
        // remaining index distance to the touch is about |u|^3 / |C|, and the
        // step may not consume more than half of it at once. The floor keeps
        // the crawl from outlasting the engagement radius.
        let (_, u_here, c_here, u_window_here) = assess(here.kappa, here.n);
        let mut cap = ctrl.max_step;
        if u_here.norm() < 2.0 * ctrl.crossing_re_window && here.kappa.im.abs() < 0.2 {
            let s_est = u_here.norm().powi(3) / c_here;
            let floor = (0.3 * u_window_here.powi(3) / c_here).clamp(ctrl.min_step, 1e-4);
            cap = cap.min((0.5 * s_est).max(floor));
        }
        // Inside the hint zone a single step may also not halve the height
        // above the axis: the gate above can sit just past a full step, and
        // one uncapped move would cross the whole approach cone, starving
        // the later angle estimate of incoming samples. Enforced on the
        // corrected point below; the throttle stands down at tiny steps so
        // it can never starve the march itself.
        let height_floor = if u_here.norm() < 2.0 * ctrl.crossing_re_window {
            let height = here.kappa.im * im_sign;
            if height > 1e-4 {
                0.5 * height
            } else {
                Real::NEG_INFINITY
            }
        } else {
            Real::NEG_INFINITY
        };

        let mut dn = step.min(cap);
        loop {
            let mut n_next = here.n + dir * dn;
            if (n_next - n_end) * dir > 0.0 {
                n_next = n_end;
            }
            let mut exact_target = false;
            if let Some(&m) = mandatory.get(m_idx) {
                if (n_next - m) * dir >= 0.0 {
                    n_next = m;
                    exact_target = true;
                }
            }
            let dn_eff = n_next - here.n;

            let predicted = match det.velocity(here.kappa, here.n) {
                Ok(v) => here.kappa + v * dn_eff,
                Err(_) => {
                    if points.len() >= 2 {
                        let prev = points[points.len() - 2];
                        here.kappa + (here.kappa - prev.kappa) * (dn_eff / (here.n - prev.n))
                    } else {
                        here.kappa
                    }
                }
            };

            let outcome = correct(det, n_next, predicted, ctrl.max_newton);
            let accepted = match outcome {
                Ok((kappa, iters)) => {
                    let pred_move = (predicted - here.kappa).norm();
                    let real_move = (kappa - here.kappa).norm();
                    let allowance = ctrl.continuity_factor
                        * pred_move.max(1e-3 * (1.0 + here.kappa.norm()));
                    let starved = dn_eff.abs() > 4.0 * ctrl.min_step
                        && kappa.im * im_sign < height_floor;
                    if real_move > allowance || kappa.im * im_sign < -1e-9 || starved {
                        None
                    } else {
                        Some((kappa, iters))
                    }
                }
                Err(CoreError::NoConvergence { .. }) => None,
                Err(other) => return Err(other),
            };

            match accepted {
                Some((kappa, iters)) => {
                    points.push(TrajectoryPoint { n: n_next, kappa });
                    if exact_target {
                        m_idx += 1;
                    }
                    if iters <= ctrl.easy_newton {
                        step = (step * ctrl.growth).min(ctrl.max_step);
                    } else if iters > ctrl.hard_newton {
                        step = (step * 0.5).max(ctrl.min_step);
                    }
                    break;
                }
                None => {
                    if dn_eff.abs() <= ctrl.min_step * 1.000001 {
                        return Err(CoreError::ContinuityViolation {
                            n: n_next,
                            step: dn_eff.abs(),
                            limit: ctrl.min_step,
                        });
                    }
                    dn = (dn_eff.abs() * 0.5).max(ctrl.min_step);
                    step = dn;
                }
            }
        }

        // Touch detection on the accepted point: close to a hint in u, with
        // the cube model placing the touch ahead of the march (a small
        // just-behind tolerance catches a step that crossed undetected).
        let last = *points.last().expect("just pushed");
        let (hint, u, _, u_window) = assess(last.kappa, last.n);
        if u.norm() < u_window && (last.kappa.re - hint).abs() < ctrl.crossing_re_window {
            let u3 = u * u * u;
            let mut n_star_est = last.n;
            for _ in 0..3 {
                let c = cube_coefficient(hint, n_star_est);
                n_star_est = last.n - u3.re / c;
                if !n_star_est.is_finite() || n_star_est <= 0.0 {
                    break;
                }
            }
            let plausible = n_star_est.is_finite()
                && n_star_est > 0.0
                && (n_star_est - last.n) * dir > -3.0 * ctrl.min_step
                && (n_star_est - last.n).abs() < 1.0
                && (n_star_est - 1.0) * (last.n - 1.0) > 0.0;
            let fresh = events
                .last()
                .is_none_or(|e| (n_star_est - e.n_star).abs() > 20.0 * ctrl.min_step);
            let mandatory_first = mandatory
                .get(m_idx)
                .is_some_and(|&m| (n_star_est - MANDATORY_DROP_MARGIN * dir - m) * dir > 0.0);
            if plausible && fresh && !mandatory_first {
                while mandatory
                    .get(m_idx)
                    .is_some_and(|&m| (m - n_star_est).abs() <= MANDATORY_DROP_MARGIN)
                {
                    m_idx += 1;
                }
                match refine_crossing(det, hint, n_star_est) {
                    Ok((kappa_star, n_star)) if (n_star - last.n) * dir > 0.0 => {
                        if (n_end - n_star) * dir < 1e-4 {
                            // The touch sits at the end of the march or just
                            // past it. Marching closer drives Newton into the
                            // degenerate triple root, so the trajectory ends
                            // here; the touch is kept when it falls inside
                            // the range.
                            if (n_end - n_star) * dir >= 0.0 {
                                let touch_index = points.len();
                                points.push(TrajectoryPoint {
                                    n: n_star,
                                    kappa: C64::new(kappa_star, 0.0),
                                });
                                events.push(CrossingEvent { n_star, kappa_star, touch_index });
                            }
                            break 'march;
                        }
                        let touch_index = points.len();
                        points.push(TrajectoryPoint {
                            n: n_star,
                            kappa: C64::new(kappa_star, 0.0),
                        });
                        events.push(CrossingEvent { n_star, kappa_star, touch_index });

                        // Re-enter on the outgoing branch at |u| around 0.085,
                        // whatever the cube coefficient.
                        let c_star = cube_coefficient(kappa_star, n_star);
                        let mut delta = (n_star - last.n)
                            .abs()
                            .max(1e-3)
                            .min(6.1e-4 / c_star.abs())
                            .max(ctrl.min_step);
                        delta = delta.min((n_end - n_star) * dir);
                        if let Some(&m) = mandatory.get(m_idx) {
                            delta = delta.min((m - n_star) * dir);
                        }
                        let n_next = n_star + dir * delta;
                        let c3 = c_star * (n_next - n_star);
                        let theta = if c3 > 0.0 { 2.0 * PI / 3.0 } else { PI / 3.0 };
                        let r = c3.abs().cbrt();
                        let predicted =
                            C64::new(kappa_star, 0.0) + C64::from_polar(r, theta * im_sign);
                        let (kappa, _) = correct(det, n_next, predicted, ctrl.max_newton)?;
                        if (kappa - predicted).norm() > 0.5 * r {
                            return Err(CoreError::ContinuityViolation {
                                n: n_next,
                                step: (kappa - predicted).norm(),
                                limit: 0.5 * r,
                            });
                        }
                        points.push(TrajectoryPoint { n: n_next, kappa });
                        step = delta.max(ctrl.min_step).min(ctrl.max_step);
                    }
                    Ok((kappa_star, n_star)) => {
                        // The march stepped over the touch in one go; slot the
                        // on-axis point in behind the accepted sample.
                        let idx = points.len() - 1;
                        let duplicate = events
                            .last()
                            .is_some_and(|e| (n_star - e.n_star).abs() <= 20.0 * ctrl.min_step);
                        let ordered = idx > 0
                            && (n_star - points[idx - 1].n) * dir > 0.0
                            && (points[idx].n - n_star) * dir > 0.0;
                        if !duplicate && ordered {
                            points.insert(
                                idx,
                                TrajectoryPoint { n: n_star, kappa: C64::new(kappa_star, 0.0) },
                            );
                            events.push(CrossingEvent { n_star, kappa_star, touch_index: idx });
                            step = (points[idx + 1].n - n_star).abs().max(ctrl.min_step);
                        }
                    }
                    // Engaged too early: keep marching, the zone shrinks.
                    Err(CoreError::NoConvergence { .. }) => {}
                    Err(other) => return Err(other),
                }
            }
        }
    }

    Ok(Trajectory { points, events })
}
