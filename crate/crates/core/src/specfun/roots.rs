use crate::{C64, CoreError};

/// First `count` positive roots of `J_p`, ascending.
///
/// Brackets come from a sign scan on a grid of spacing `pi/4` starting at
/// `p + 1`; consecutive roots of `J_p` are separated by more than `pi/4` for
/// every order, so no root is skipped. Each bracket is polished by a
/// Newton/bisection hybrid; returned roots satisfy `|J_p(root)| < 1e-12`.
pub fn bessel_real_roots(p: u32, count: usize) -> Result<Vec<f64>, CoreError> {
    if p > super::MAX_ORDER {
        return Err(CoreError::domain(format!(
            "order {p} exceeds {}",
            super::MAX_ORDER
        )));
    }
    if count == 0 || count > 100 {
        return Err(CoreError::domain(format!(
            "root count {count} outside 1..=100"
        )));
    }
    let step = std::f64::consts::FRAC_PI_4;
    let mut roots = Vec::with_capacity(count);
    let mut x = p as f64 + 1.0;
    let mut fx = j_real(p, x).0;
    // J_p > 0 on (0, first root); the scan enters from the positive side.
    let mut guard = 0usize;
    while roots.len() < count {
        guard += 1;
        assert!(guard < 100_000, "root scan runaway for p = {p}");
        let x_next = x + step;
        let f_next = j_real(p, x_next).0;
        if fx == 0.0 {
            roots.push(x);
        } else if fx.signum() != f_next.signum() && f_next != 0.0 {
            roots.push(polish_in_bracket(p, x, x_next));
        }
        x = x_next;
        fx = f_next;
    }
    Ok(roots)
}

/// `(J_p(x), J_p'(x))` at real `x`, bypassing the public modulus cap: high-order
/// root tables legitimately reach beyond it, and the backward recurrence has no
/// such limit on the real axis.
fn j_real(p: u32, x: f64) -> (f64, f64) {
    let eval = super::eval_j_unchecked(p, C64::new(x, 0.0));
    (eval.value.re, eval.derivative.re)
}

fn polish_in_bracket(p: u32, mut a: f64, mut b: f64) -> f64 {
    let (mut fa, _) = j_real(p, a);
    // Safeguarded Newton: fall back to bisection whenever the Newton step
    // leaves the bracket or fails to shrink it.
    let mut x = 0.5 * (a + b);
    for _ in 0..100 {
        let (fx, dfx) = j_real(p, x);
        if fx == 0.0 {
            return x;
        }
        if fa.signum() != fx.signum() {
            b = x;
        } else {
            a = x;
            fa = fx;
        }
        let newton = x - fx / dfx;
        let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 1e-15 * x {
            let (f_next, _) = j_real(p, next);
            return if f_next.abs() < fx.abs() { next } else { x };
        }
        x = next;
    }
    x
}
