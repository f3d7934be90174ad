use super::BesselEval;
use crate::C64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Series/recurrence switch-over for `J_p`.
const SERIES_MAX_ABS: f64 = 12.0;

/// Hankel functions switch to the large-argument expansion beyond this modulus.
/// Chosen where the series' cancellation error and the expansion's truncation
/// error are both near their joint minimum (~1e-11 relative on the real axis).
const ASYMPTOTIC_MIN_ABS: f64 = 12.0;

/// Magnitude guard for the backward recurrence; values are rescaled when they
/// pass it, so the ladder never overflows even for extreme order/argument mixes.
const RESCALE_LIMIT: f64 = 1e250;

pub(crate) fn eval_j(p: u32, z: C64) -> BesselEval {
    if z == C64::new(0.0, 0.0) {
        let value = if p == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        let derivative = if p == 1 { C64::new(0.5, 0.0) } else { C64::new(0.0, 0.0) };
        return BesselEval { value, derivative };
    }
    if z.norm() <= SERIES_MAX_ABS {
        let jp = j_series(p, z);
        let jp1 = j_series(p + 1, z);
        // z.finv() rather than /z: the plain division underflows its norm_sqr
        // denominator for very small |z|.
        let derivative = jp * (p as f64) * z.finv() - jp1;
        BesselEval { value: jp, derivative }
    } else {
        let ladder = miller_ladder(p + 1, z);
        let value = ladder[p as usize];
        let derivative = if p == 0 {
            -ladder[1]
        } else {
            (ladder[p as usize - 1] - ladder[p as usize + 1]) * 0.5
        };
        BesselEval { value, derivative }
    }
}

/// Maclaurin series for `J_p(z)`; accurate to ~1e-11 relative up to `|z| = 12`.
fn j_series(p: u32, z: C64) -> C64 {
    let half = z * 0.5;
    let ratio = -half * half;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..=120u32 {
        term = term * ratio / ((k as f64) * ((p + k) as f64));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    let mut prefactor = half.powu(p);
    let mut pfact = 1.0;
    for k in 2..=p {
        pfact *= k as f64;
    }
    prefactor /= pfact;
    prefactor * sum
}

/// Backward recurrence for `J_0..J_pmax`, normalized by the even-order sum on
/// and near the real axis and by a plane-wave sum elsewhere.
fn miller_ladder(pmax: u32, z: C64) -> Vec<C64> {
    let pmax = pmax as usize;
    let zn = z.norm();
    let top = (pmax as f64).max(zn);
    let start = top as usize + 20 + (10.0 * (top + 1.0).sqrt()) as usize;

    let use_even_sum = z.im.abs() <= 1.0;
    // For the plane-wave normalizer pick the sign that makes |e^{isz}| >= 1.
    let s: f64 = if z.im > 0.0 { -1.0 } else { 1.0 };

    let mut out = vec![C64::new(0.0, 0.0); pmax + 1];
    let mut norm = C64::new(0.0, 0.0);
    let mut upper = C64::new(0.0, 0.0);
    let mut cur = C64::new(1e-280, 0.0);

    let mut k = start;
    loop {
        // Contribution of order k to the normalizing sum.
        if use_even_sum {
            if k == 0 {
                norm += cur;
            } else if k % 2 == 0 {
                norm += cur * 2.0;
            }
        } else {
            // e^{isz} = J_0 + 2 sum_k (is)^k J_k
            let coef = match k % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, s),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -s),
            };
            norm += cur * coef * if k == 0 { 1.0 } else { 2.0 };
        }
        if k <= pmax {
            out[k] = cur;
        }
        if k == 0 {
            break;
        }
        let next = cur * (2.0 * k as f64) / z - upper;
        upper = cur;
        cur = next;
        k -= 1;

        if cur.norm() > RESCALE_LIMIT {
            let scale = 1e-250;
            cur *= scale;
            upper *= scale;
            norm *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }

    let factor = if use_even_sum {
        norm.finv()
    } else {
        // finv(): the unnormalized sum can be tiny enough that dividing by it
        // underflows norm_sqr.
        (C64::new(0.0, s) * z).exp() * norm.finv()
    };
    for v in out.iter_mut() {
        *v *= factor;
    }
    out
}

/// `Y_0` and `Y_1` by the logarithmic Frobenius series; small/moderate `|z|`.
fn y01_series(z: C64) -> (C64, C64) {
    let j0 = j_series(0, z);
    let j1 = j_series(1, z);
    let lg = (z * 0.5).ln() + EULER_GAMMA;
    let q = z * z * 0.25;
    let two_over_pi = std::f64::consts::FRAC_2_PI;

    // Y_0 = (2/pi) [ (ln(z/2)+gamma) J_0 + sum_{k>=1} (-1)^{k+1} H_k q^k / (k!)^2 ]
    let mut term = C64::new(1.0, 0.0);
    let mut harmonic = 0.0;
    let mut sum0 = C64::new(0.0, 0.0);
    let mut sign = 1.0;
    for k in 1..=120u32 {
        let kf = k as f64;
        term = term * q / (kf * kf);
        harmonic += 1.0 / kf;
        sum0 += term * (sign * harmonic);
        sign = -sign;
        if term.norm() * harmonic <= 1e-17 * sum0.norm().max(1e-300) {
            break;
        }
    }
    let y0 = (lg * j0 + sum0) * two_over_pi;

    // Y_1 = (2/pi)(ln(z/2)+gamma) J_1 - 2/(pi z)
    //       - (z/(2 pi)) sum_{k>=0} (-1)^k (H_k + H_{k+1}) q^k / (k! (k+1)!)
    let mut term = C64::new(1.0, 0.0); // q^k / (k!(k+1)!)
    let mut hk = 0.0;
    let mut hk1 = 1.0;
    let mut sum1 = term * (hk + hk1);
    let mut sign = -1.0;
    for k in 1..=120u32 {
        let kf = k as f64;
        term = term * q / (kf * (kf + 1.0));
        hk += 1.0 / kf;
        hk1 += 1.0 / (kf + 1.0);
        sum1 += term * (sign * (hk + hk1));
        sign = -sign;
        if term.norm() * (hk + hk1) <= 1e-17 * sum1.norm().max(1e-300) {
            break;
        }
    }
    let y1 = lg * j1 * two_over_pi - z.finv() * two_over_pi
        - z * 0.5 * std::f64::consts::FRAC_1_PI * sum1;
    (y0, y1)
}

/// Large-argument expansion of `H^(1)_p(z)` for `p` in {0, 1}.
///
/// `H^(1)_p ~ sqrt(2/(pi z)) e^{i(z - p pi/2 - pi/4)} sum_k i^k a_k(p) / z^k`,
/// truncated at the smallest term. Relative accuracy ~e^{-2|z|} uniformly in
/// the argument's phase, which is what makes the upper half-plane usable.
fn hankel_asymptotic(p: u32, z: C64) -> C64 {
    let mu = 4.0 * (p * p) as f64;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = term.norm();
    for k in 0..40u32 {
        let kf = k as f64;
        let numer = mu - (2.0 * kf + 1.0) * (2.0 * kf + 1.0);
        term = term * C64::new(0.0, 1.0) * numer / (8.0 * (kf + 1.0) * z);
        let mag = term.norm();
        if mag >= last {
            break;
        }
        sum += term;
        last = mag;
        if mag <= 1e-17 * sum.norm() {
            break;
        }
    }
    let phase = C64::new(0.0, 1.0) * (z - C64::new((p as f64) * 0.5 + 0.25, 0.0) * std::f64::consts::PI);
    (C64::new(std::f64::consts::FRAC_2_PI, 0.0) / z).sqrt() * phase.exp() * sum
}

pub(crate) fn eval_h1(p: u32, z: C64) -> BesselEval {
    let (h0, h1) = if z.norm() <= ASYMPTOTIC_MIN_ABS {
        let (y0, y1) = y01_series(z);
        let i = C64::new(0.0, 1.0);
        (j_series(0, z) + i * y0, j_series(1, z) + i * y1)
    } else {
        (hankel_asymptotic(0, z), hankel_asymptotic(1, z))
    };
    if p == 0 {
        return BesselEval { value: h0, derivative: -h1 };
    }
    // Upward recurrence: stable because Y dominates with growing order.
    let mut prev = h0;
    let mut cur = h1;
    for k in 1..p {
        let next = cur * (2.0 * k as f64) / z - prev;
        prev = cur;
        cur = next;
    }
    // prev = H_{p-1}, cur = H_p
    let above = cur * (2.0 * p as f64) / z - prev;
    BesselEval { value: cur, derivative: (prev - above) * 0.5 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn series_and_recurrence_agree_at_the_switchover() {
        // Both representations are valid in a band around |z| = 12.
        for &(re, im) in &[(11.5, 0.0), (12.5, 0.0), (11.0, 3.0), (9.0, -6.0), (12.0, 1.0)] {
            let z = C64::new(re, im);
            for p in [0u32, 1, 2, 5, 9] {
                let a = j_series(p, z * (SERIES_MAX_ABS / z.norm() * 0.999));
                let b = miller_ladder(p, z * (SERIES_MAX_ABS / z.norm() * 0.999))[p as usize];
                assert!(close(a, b, 1e-10), "p={p} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn known_y_values_at_one() {
        let (y0, y1) = y01_series(C64::new(1.0, 0.0));
        assert!((y0.re - 0.088_256_964_215_676_96).abs() < 1e-13, "{y0}");
        assert!((y1.re - (-0.781_212_821_300_288_7)).abs() < 1e-13, "{y1}");
        assert!(y0.im.abs() < 1e-16 && y1.im.abs() < 1e-16);
    }

    #[test]
    fn hankel_branches_agree_at_the_switchover() {
        for &(re, im) in &[(12.0, 0.0), (11.5, 3.0), (11.8, -2.0), (11.0, -4.5), (11.3, 4.0)] {
            let z = C64::new(re, im);
            let (y0, y1) = y01_series(z);
            let i = C64::new(0.0, 1.0);
            let small0 = j_series(0, z) + i * y0;
            let small1 = j_series(1, z) + i * y1;
            let big0 = hankel_asymptotic(0, z);
            let big1 = hankel_asymptotic(1, z);
            // Compare relative to H itself: in the upper half-plane H is tiny and
            // the series route loses e^{2 Im z} digits to cancellation, which is
            // exactly why the expansion takes over.
            let tol = if im.abs() > 1.0 { 1e-8 } else { 5e-10 };
            assert!((small0 - big0).norm() <= tol * big0.norm(), "z={z}: {small0} vs {big0}");
            assert!((small1 - big1).norm() <= tol * big1.norm(), "z={z}: {small1} vs {big1}");
        }
    }
}
