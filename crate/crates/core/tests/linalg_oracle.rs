//! Cross-checks the singular value path against a test-local eigensolver that
//! shares no code with it: the Gram matrix A^H A is embedded as a real
//! symmetric matrix of twice the size and diagonalized by classical Jacobi
//! rotations. Each eigenvalue of the Gram matrix appears twice in the
//! embedding; singular values are the square roots.

use itraj_core::linalg::{singular_values, CMat};
use itraj_core::C64;

fn stream(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed;
    move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi, ascending.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Singular values of a complex matrix through the Gram route: the Hermitian
/// G = A^H A maps to the real symmetric [[X, -Y], [Y, X]] with G = X + iY.
fn gram_singular_values(a: &CMat) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut g = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..m {
                s += a.get(k, i).conj() * a.get(k, j);
            }
            g[i][j] = s;
        }
    }
    let mut real = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            real[i][j] = g[i][j].re;
            real[i][j + n] = -g[i][j].im;
            real[i + n][j] = g[i][j].im;
            real[i + n][j + n] = g[i][j].re;
        }
    }
    let eig = jacobi_eigenvalues(real);
    // Doubled spectrum: take every second value, clamp roundoff negatives.
    let mut out: Vec<f64> = eig
        .iter()
        .skip(1)
        .step_by(2)
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    out.reverse();
    out
}

#[test]
fn gram_route_matches_qr_route() {
    let mut r = stream(0x0c0ffee);
    for &(m, n) in &[(50usize, 60usize), (40, 25), (33, 33)] {
        let a = CMat::from_fn(m, n, |_, _| C64::new(r(), r()));
        let via_qr = singular_values(&a);
        let via_gram = gram_singular_values(&a);
        assert_eq!(via_qr.len(), via_gram.len().min(m.min(n)));
        for (k, (x, y)) in via_qr.iter().zip(&via_gram).enumerate() {
            assert!(
                (x - y).abs() <= 1e-9 * via_qr[0],
                "{m}x{n} value {k}: {x} vs {y}"
            );
        }
    }
}

#[test]
fn gram_route_matches_on_nearly_singular_matrix() {
    // Last column nearly a multiple of the first: one tiny singular value.
    let mut r = stream(0xbad5eed);
    let m = 20;
    let n = 8;
    let mut a = CMat::from_fn(m, n, |_, _| C64::new(r(), r()));
    for i in 0..m {
        let v = a.get(i, 0) * C64::new(0.3, -1.1);
        a.set(i, n - 1, v + C64::new(r(), r()) * 1e-7);
    }
    let via_qr = singular_values(&a);
    let via_gram = gram_singular_values(&a);
    let smallest = via_qr.last().unwrap();
    assert!(*smallest < 1e-6 * via_qr[0]);
    // The Gram route squares the condition number, so the tiny value only has
    // about half the digits; the large ones must still match tightly.
    for (x, y) in via_qr.iter().zip(&via_gram).take(n - 1) {
        assert!((x - y).abs() <= 1e-9 * via_qr[0]);
    }
    assert!((smallest - via_gram[n - 1]).abs() <= 1e-4 * via_qr[0].max(1.0) * 1e-3);
}
