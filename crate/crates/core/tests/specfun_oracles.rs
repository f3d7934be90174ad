//! Independent oracles for the special-function layer: a from-scratch Maclaurin
//! evaluator with explicit factorials, exact Wronskians, classical table values,
//! and large-argument amplitude laws. None of these share code with the library
//! paths they check.

use itraj_core::specfun::{bessel_j, bessel_real_roots, hankel1, spherical_j};
use itraj_core::C64;

/// Deterministic pseudo-random stream (SplitMix64), so failures are reproducible.
struct Stream(u64);

impl Stream {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}

/// 40-term Maclaurin sum with explicit factorial coefficients; valid to ~1e-13
/// relative for |z| <= 8 and p <= 8. Deliberately naive: this is the oracle.
fn j_oracle(p: u32, z: C64) -> C64 {
    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
    }
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..40u32 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign / (factorial(k) * factorial(k + p));
        sum += (z * 0.5).powu(2 * k + p) * coeff;
    }
    sum
}

#[test]
fn series_oracle_pins_j_values() {
    let pts = [
        C64::new(0.3, 0.0),
        C64::new(1.2, 0.7),
        C64::new(3.0, -2.0),
        C64::new(6.5, 1.0),
        C64::new(0.0, 4.0),
        C64::new(7.9, -0.4),
    ];
    for p in [0u32, 1, 2, 5, 8] {
        for &z in &pts {
            let got = bessel_j(p, z).unwrap();
            let want = j_oracle(p, z);
            let scale = want.norm().max(1e-12);
            assert!(
                (got.value - want).norm() <= 1e-11 * scale.max(1.0),
                "p={p} z={z}: {} vs {want}",
                got.value
            );
            // Derivative against the oracle's recurrence form.
            let want_d = if p == 0 {
                -j_oracle(1, z)
            } else {
                (j_oracle(p - 1, z) - j_oracle(p + 1, z)) * 0.5
            };
            assert!(
                (got.derivative - want_d).norm() <= 1e-11 * want_d.norm().max(1.0),
                "p={p} z={z} derivative"
            );
        }
    }
}

#[test]
fn classical_values_at_one() {
    let j0 = bessel_j(0, C64::new(1.0, 0.0)).unwrap();
    assert!((j0.value.re - 0.765_197_686_557_966_6).abs() < 1e-14);
    let h0 = hankel1(0, C64::new(1.0, 0.0)).unwrap();
    assert!((h0.value.re - 0.765_197_686_557_966_6).abs() < 1e-13);
    assert!((h0.value.im - 0.088_256_964_215_676_96).abs() < 1e-13);
}

#[test]
fn wronskian_of_j_and_h1() {
    // J_p(z) H'_p(z) - J'_p(z) H_p(z) = 2i/(pi z). Off the real axis the two
    // products are e^{2|Im z|} larger than their difference, so the comparison
    // scale has to be the product magnitude, not the Wronskian value; on the
    // real axis the two scales coincide up to a factor of two.
    let mut rng = Stream(0x5eed_0001);
    for _ in 0..400 {
        let re = rng.uniform(0.05, 30.0);
        let im = rng.uniform(-3.0, 3.0);
        let z = C64::new(re, im);
        if z.norm() > 30.0 {
            continue;
        }
        let p = (rng.next_u64() % 6) as u32;
        let j = bessel_j(p, z).unwrap();
        let h = hankel1(p, z).unwrap();
        let w = j.value * h.derivative - j.derivative * h.value;
        let exact = C64::new(0.0, std::f64::consts::FRAC_2_PI) / z;
        let scale = (j.value * h.derivative).norm().max((j.derivative * h.value).norm());
        assert!(
            (w - exact).norm() <= 1e-10 * scale.max(exact.norm()),
            "p={p} z={z}: wronskian {w} vs {exact}"
        );
    }
    let mut rng = Stream(0x5eed_0002);
    for _ in 0..400 {
        let re = rng.uniform(0.05, 60.0);
        let im = rng.uniform(-5.0, 5.0);
        let z = C64::new(re, im);
        let p = (rng.next_u64() % 4) as u32;
        let j = bessel_j(p, z).unwrap();
        let h = hankel1(p, z).unwrap();
        let w = j.value * h.derivative - j.derivative * h.value;
        let exact = C64::new(0.0, std::f64::consts::FRAC_2_PI) / z;
        let scale = (j.value * h.derivative).norm().max((j.derivative * h.value).norm());
        assert!(
            (w - exact).norm() <= 1e-9 * scale.max(exact.norm()),
            "p={p} z={z}"
        );
    }
}

#[test]
fn cylinder_ode_residual_small_relative_to_largest_term() {
    // z^2 J'' + z J' + (z^2 - p^2) J = 0 with J'' assembled from the derivative
    // ladder of adjacent orders; three separately normalized evaluations have to
    // cancel to near rounding.
    let mut rng = Stream(0x5eed_0003);
    for _ in 0..10_000 {
        let p = (rng.next_u64() % 21) as u32;
        let z = C64::new(rng.uniform(0.2, 30.0), rng.uniform(-4.0, 4.0));
        let j = bessel_j(p, z).unwrap();
        let second = if p == 0 {
            -bessel_j(1, z).unwrap().derivative
        } else {
            (bessel_j(p - 1, z).unwrap().derivative - bessel_j(p + 1, z).unwrap().derivative) * 0.5
        };
        let t1 = z * z * second;
        let t2 = z * j.derivative;
        let t3 = (z * z - C64::new((p * p) as f64, 0.0)) * j.value;
        let residual = (t1 + t2 + t3).norm();
        let largest = t1.norm().max(t2.norm()).max(t3.norm()).max(1e-280);
        assert!(
            residual <= 1e-10 * largest,
            "p={p} z={z}: residual {residual:e} vs largest {largest:e}"
        );
    }
}

#[test]
fn spherical_ode_residual_small_relative_to_largest_term() {
    // z^2 j'' + 2 z j' + (z^2 - p(p+1)) j = 0.
    let mut rng = Stream(0x5eed_0004);
    for _ in 0..10_000 {
        let p = (rng.next_u64() % 13) as u32;
        let z = C64::new(rng.uniform(0.2, 25.0), rng.uniform(-4.0, 4.0));
        let j = spherical_j(p, z).unwrap();
        // j'' from j'_p = j_{p-1} - ((p+1)/z) j_p differentiated:
        // j''_p = j'_{p-1} + ((p+1)/z^2) j_p - ((p+1)/z) j'_p, with
        // j'_{-1} treated through j_{-1} = cos z / z never needed since p >= 0:
        // for p = 0 use j''_0 = -j'_1 directly.
        let second = if p == 0 {
            -spherical_j(1, z).unwrap().derivative
        } else {
            let below = spherical_j(p - 1, z).unwrap();
            let pf = (p + 1) as f64;
            below.derivative + j.value * pf / (z * z) - j.derivative * pf / z
        };
        let t1 = z * z * second;
        let t2 = z * j.derivative * 2.0;
        let t3 = (z * z - C64::new((p * (p + 1)) as f64, 0.0)) * j.value;
        let residual = (t1 + t2 + t3).norm();
        let largest = t1.norm().max(t2.norm()).max(t3.norm()).max(1e-280);
        assert!(
            residual <= 1e-10 * largest,
            "p={p} z={z}: residual {residual:e} vs largest {largest:e}"
        );
    }
}

#[test]
fn spherical_closed_forms() {
    // j_0 = sin z / z, j_1 = sin z / z^2 - cos z / z, on a complex grid.
    let mut rng = Stream(0x5eed_0005);
    for _ in 0..300 {
        let z = C64::new(rng.uniform(0.01, 40.0), rng.uniform(-5.0, 5.0));
        let s0 = z.sin() / z;
        let s1 = z.sin() / (z * z) - z.cos() / z;
        let e0 = spherical_j(0, z).unwrap();
        let e1 = spherical_j(1, z).unwrap();
        assert!((e0.value - s0).norm() <= 1e-12 * (1.0 + s0.norm()));
        assert!((e1.value - s1).norm() <= 1e-11 * (1.0 + s1.norm()), "z={z}");
        assert!((e0.derivative + s1).norm() <= 1e-11 * (1.0 + s1.norm()));
    }
}

#[test]
fn conjugate_symmetry_and_realness() {
    let mut rng = Stream(0x5eed_0006);
    for _ in 0..500 {
        let z = C64::new(rng.uniform(0.1, 60.0), rng.uniform(-5.0, 5.0));
        let p = (rng.next_u64() % 8) as u32;
        let a = bessel_j(p, z).unwrap().value;
        let b = bessel_j(p, z.conj()).unwrap().value;
        assert!((a.conj() - b).norm() <= 1e-14 * (1.0 + a.norm()), "p={p} z={z}");
        let x = rng.uniform(0.1, 150.0);
        let real_eval = bessel_j(p, C64::new(x, 0.0)).unwrap();
        assert_eq!(real_eval.value.im, 0.0, "J must stay exactly real on the real axis");
        assert_eq!(real_eval.derivative.im.abs(), 0.0);
    }
}

#[test]
fn hankel_amplitude_and_decay() {
    // |H^(1)_0(x)| = sqrt(2/(pi x)) (1 + O(1/x)) on the real axis.
    for &x in &[50.0, 100.0, 180.0] {
        let h = hankel1(0, C64::new(x, 0.0)).unwrap();
        let amp = (std::f64::consts::FRAC_2_PI / x).sqrt();
        assert!(
            (h.value.norm() - amp).abs() <= 1e-3 * amp,
            "x={x}: {} vs {amp}",
            h.value.norm()
        );
    }
    // Exponential decay upward: |H(x + 6i)| ~ e^{-6} |H(x)|, within a factor.
    let base = hankel1(0, C64::new(40.0, 0.0)).unwrap().value.norm();
    let up = hankel1(0, C64::new(40.0, 6.0)).unwrap().value.norm();
    let ratio = up / base;
    assert!(ratio < 3e-3 && ratio > 2e-4, "decay ratio {ratio}");
}

#[test]
fn recurrence_couples_adjacent_orders() {
    // J_{p-1} + J_{p+1} = (2p/z) J_p across both evaluation regimes.
    let mut rng = Stream(0x5eed_0007);
    for _ in 0..2000 {
        let p = 1 + (rng.next_u64() % 30) as u32;
        let z = C64::new(rng.uniform(0.3, 100.0), rng.uniform(-5.0, 5.0));
        let a = bessel_j(p - 1, z).unwrap().value;
        let b = bessel_j(p, z).unwrap().value;
        let c = bessel_j(p + 1, z).unwrap().value;
        let lhs = a + c;
        let rhs = b * (2.0 * p as f64) / z;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(1e-280);
        assert!((lhs - rhs).norm() <= 1e-10 * scale, "p={p} z={z}");
    }
}

#[test]
fn root_asymptotics_mcmahon() {
    // j_{0,k} ~ (k - 1/4) pi for large k.
    let roots = bessel_real_roots(0, 60).unwrap();
    let k = 50usize;
    let predicted = (k as f64 - 0.25) * std::f64::consts::PI;
    assert!((roots[k - 1] - predicted).abs() < 1e-3);
}

#[test]
fn window_violations_error() {
    assert!(bessel_j(61, C64::new(1.0, 0.0)).is_err());
    assert!(bessel_j(0, C64::new(201.0, 0.0)).is_err());
    assert!(hankel1(0, C64::new(0.0, 0.0)).is_err());
    assert!(spherical_j(61, C64::new(1.0, 0.0)).is_err());
    assert!(bessel_real_roots(61, 1).is_err());
    assert!(bessel_real_roots(0, 0).is_err());
    assert!(bessel_real_roots(0, 101).is_err());
}
