//! Dense complex linear algebra sized for boundary-collocation matrices
//! (a few hundred rows) and the small systems the root finder builds.
//!
//! The singular value path is Householder bidiagonalization followed by
//! implicit-shift QR on the real bidiagonal form. Only singular values are
//! produced; no accumulation of U or V.

use crate::{C64, CoreError, Real};

/// Row-major dense complex matrix.
#[derive(Clone, Debug)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn conj_transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Scales every column to unit Euclidean norm and returns the original
    /// norms. Columns with norm zero are left untouched and report 0.
    pub fn normalize_columns(&mut self) -> Vec<Real> {
        let mut norms = vec![0.0; self.cols];
        for j in 0..self.cols {
            let mut s = 0.0;
            for i in 0..self.rows {
                s += self.get(i, j).norm_sqr();
            }
            let norm = s.sqrt();
            norms[j] = norm;
            if norm > 0.0 {
                let inv = 1.0 / norm;
                for i in 0..self.rows {
                    let v = self.get(i, j);
                    self.set(i, j, v * inv);
                }
            }
        }
        norms
    }
}

/// All singular values, descending. Works for any shape; a wide matrix is
/// conjugate-transposed first since that leaves the values unchanged.
pub fn singular_values(a: &CMat) -> Vec<Real> {
    if a.rows == 0 || a.cols == 0 {
        return Vec::new();
    }
    let work = if a.rows >= a.cols { a.clone() } else { a.conj_transpose() };
    let (mut d, mut e) = bidiagonalize(work);
    bidiagonal_qr(&mut d, &mut e);
    let mut sigma: Vec<Real> = d.iter().map(|x| x.abs()).collect();
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sigma
}

pub fn smallest_singular_value(a: &CMat) -> Real {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the numerical column space: column-pivoted
/// Householder QR, truncated where the pivot magnitude drops below
/// `rel_tol` times the first pivot. The returned matrix has orthonormal
/// columns spanning the range of `a` to that tolerance.
///
/// Pivoting matters here: collocation bases are heavily redundant, and an
/// unpivoted factorization would spread the redundancy across the whole
/// triangle instead of pushing it to the tail where the cut happens.
pub fn orthonormal_range(a: &CMat, rel_tol: Real) -> CMat {
    let (m, n) = (a.rows, a.cols);
    let kmax = m.min(n);
    let mut work = a.clone();
    let mut reflectors: Vec<Vec<C64>> = Vec::new();
    let mut first_pivot = 0.0;
    let mut rank = 0;
    for k in 0..kmax {
        // Exact remaining norms; the matrices here are small enough that the
        // classic downdating shortcut would only buy noise.
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let mut s = 0.0;
            for i in k..m {
                s += work.get(i, j).norm_sqr();
            }
            if s > best_norm {
                best_norm = s;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                let t = work.get(i, k);
                work.set(i, k, work.get(i, best));
                work.set(i, best, t);
            }
        }
        let beta = best_norm.max(0.0).sqrt();
        if k == 0 {
            first_pivot = beta;
        }
        if beta == 0.0 || beta < rel_tol * first_pivot {
            break;
        }
        // Householder vector sending column k to a multiple of e_k, with the
        // reflected entry phase-aligned so the leading term never cancels.
        let x1 = work.get(k, k);
        let phase = if x1.norm() > 0.0 { x1 / x1.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * beta;
        let mut v = vec![C64::new(0.0, 0.0); m - k];
        v[0] = x1 - alpha;
        for i in (k + 1)..m {
            v[i - k] = work.get(i, k);
        }
        let vnorm_sqr: Real = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sqr > 0.0 {
            for j in k..n {
                let mut dot = C64::new(0.0, 0.0);
                for i in k..m {
                    dot += v[i - k].conj() * work.get(i, j);
                }
                let scale = dot * (2.0 / vnorm_sqr);
                for i in k..m {
                    let t = work.get(i, j) - v[i - k] * scale;
                    work.set(i, j, t);
                }
            }
        }
        reflectors.push(v);
        rank = k + 1;
    }
    // Thin Q: apply the reflectors in reverse order to the leading columns
    // of the identity.
    let mut q = CMat::zeros(m, rank);
    for j in 0..rank {
        q.set(j, j, C64::new(1.0, 0.0));
    }
    for k in (0..rank).rev() {
        let v = &reflectors[k];
        let vnorm_sqr: Real = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sqr == 0.0 {
            continue;
        }
        for j in 0..rank {
            let mut dot = C64::new(0.0, 0.0);
            for i in k..m {
                dot += v[i - k].conj() * q.get(i, j);
            }
            let scale = dot * (2.0 / vnorm_sqr);
            for i in k..m {
                let t = q.get(i, j) - v[i - k] * scale;
                q.set(i, j, t);
            }
        }
    }
    q
}

/// Householder reduction of a tall matrix to upper bidiagonal form. Returns
/// the absolute values of the diagonal and superdiagonal; a diagonal unitary
/// on each side can rotate any complex bidiagonal to nonnegative entries, so
/// the singular values only depend on the magnitudes.
fn bidiagonalize(mut a: CMat) -> (Vec<Real>, Vec<Real>) {
    let (m, n) = (a.rows, a.cols);
    debug_assert!(m >= n);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![C64::new(0.0, 0.0); m.max(n)];

    for k in 0..n {
        // Left reflector clearing column k below the diagonal.
        let beta = make_reflector(&mut v, (k..m).map(|i| a.get(i, k)));
        if beta != 0.0 {
            for j in k..n {
                let mut s = C64::new(0.0, 0.0);
                for i in k..m {
                    s += v[i - k].conj() * a.get(i, j);
                }
                s *= beta;
                for i in k..m {
                    let cur = a.get(i, j);
                    a.set(i, j, cur - v[i - k] * s);
                }
            }
        }
        d[k] = a.get(k, k).norm();

        if k + 1 < n {
            // Right reflector clearing row k beyond the superdiagonal. Built
            // from the conjugated row, so the same Hermitian reflector applies
            // from the right via r <- r - beta (r . v) v^H.
            let beta = make_reflector(&mut v, (k + 1..n).map(|j| a.get(k, j).conj()));
            if beta != 0.0 {
                for i in k..m {
                    let mut s = C64::new(0.0, 0.0);
                    for j in k + 1..n {
                        s += a.get(i, j) * v[j - k - 1];
                    }
                    s *= beta;
                    for j in k + 1..n {
                        let cur = a.get(i, j);
                        a.set(i, j, cur - s * v[j - k - 1].conj());
                    }
                }
            }
            e[k] = a.get(k, k + 1).norm();
        }
    }
    (d, e)
}

/// Fills `v` with the Householder vector for the column `x` and returns beta
/// such that (I - beta v v^H) x = alpha e_1. Zero column gives beta = 0.
fn make_reflector(v: &mut [C64], x: impl Iterator<Item = C64>) -> Real {
    let mut len = 0usize;
    let mut norm_sqr = 0.0;
    for (slot, value) in v.iter_mut().zip(x) {
        *slot = value;
        norm_sqr += value.norm_sqr();
        len += 1;
    }
    if len <= 1 || norm_sqr == 0.0 {
        return 0.0;
    }
    let norm = norm_sqr.sqrt();
    let x0 = v[0];
    let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 * x0.norm().recip() };
    let alpha = -phase * norm;
    v[0] = x0 - alpha;
    // ||v||^2 = 2 (||x||^2 + |x0| ||x||), real by construction.
    let vnorm_sqr = 2.0 * (norm_sqr + x0.norm() * norm);
    if vnorm_sqr == 0.0 {
        return 0.0;
    }
    2.0 / vnorm_sqr
}

/// c a + s b = r, -s a + c b = 0.
fn givens(a: Real, b: Real) -> (Real, Real) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Implicit-shift QR on a real bidiagonal matrix, in place. On return `d`
/// holds the (unsorted, signed) singular values and `e` is negligible.
fn bidiagonal_qr(d: &mut [Real], e: &mut [Real]) {
    let n = d.len();
    if n <= 1 {
        return;
    }
    let eps = f64::EPSILON;
    let maxabs = d
        .iter()
        .chain(e.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let max_sweeps = 40 * n * n;

    for _ in 0..max_sweeps {
        // Deflate negligible superdiagonals.
        for i in 0..n - 1 {
            if e[i].abs() <= eps * (d[i].abs() + d[i + 1].abs()) + eps * eps * maxabs {
                e[i] = 0.0;
            }
        }
        // Find the trailing index q of an unreduced block.
        let mut q = n - 1;
        while q > 0 && e[q - 1] == 0.0 {
            q -= 1;
        }
        if q == 0 {
            return;
        }
        // Find its leading index p.
        let mut p = q;
        while p > 0 && e[p - 1] != 0.0 {
            p -= 1;
        }

        // A vanishing diagonal inside the block lets the superdiagonal next to
        // it be rotated away rowwise; the block then splits.
        let mut split = false;
        for i in p..q {
            if d[i].abs() <= eps * maxabs {
                d[i] = 0.0;
                zero_row(d, e, i, q);
                split = true;
                break;
            }
        }
        if split {
            continue;
        }

        qr_sweep(d, e, p, q);
    }
    // The loop bound is generous; Givens sweeps contract the superdiagonal
    // geometrically, so reaching it means the values already sit at roundoff.
}

/// Chases the row [0, e[i], 0, ...] (d[i] = 0) out of the block ending at q.
fn zero_row(d: &mut [Real], e: &mut [Real], i: usize, q: usize) {
    let mut extra = e[i];
    e[i] = 0.0;
    let mut j = i + 1;
    while extra != 0.0 && j <= q {
        let (c, s) = givens(d[j], extra);
        d[j] = c * d[j] + s * extra;
        if j < q {
            extra = -s * e[j];
            e[j] *= c;
        } else {
            extra = 0.0;
        }
        j += 1;
    }
}

/// One Golub-Kahan implicit-shift sweep on the block p..=q.
fn qr_sweep(d: &mut [Real], e: &mut [Real], p: usize, q: usize) {
    // Wilkinson shift from the trailing 2x2 of B^T B.
    let t11 = d[q - 1] * d[q - 1] + if q - 1 > p { e[q - 2] * e[q - 2] } else { 0.0 };
    let t12 = d[q - 1] * e[q - 1];
    let t22 = d[q] * d[q] + e[q - 1] * e[q - 1];
    let delta = (t11 - t22) * 0.5;
    let denom = delta + delta.signum() * delta.hypot(t12);
    let mu = if denom == 0.0 { t22 } else { t22 - t12 * t12 / denom };

    let mut y = d[p] * d[p] - mu;
    let mut z = d[p] * e[p];
    for k in p..q {
        // Right rotation on columns (k, k+1).
        let (c, s) = givens(y, z);
        if k > p {
            e[k - 1] = c * y + s * z;
        }
        let (dk, ek, dk1) = (d[k], e[k], d[k + 1]);
        d[k] = c * dk + s * ek;
        e[k] = -s * dk + c * ek;
        let bulge = s * dk1;
        d[k + 1] = c * dk1;

        // Left rotation on rows (k, k+1) clearing the bulge below the diagonal.
        let (c2, s2) = givens(d[k], bulge);
        d[k] = c2 * d[k] + s2 * bulge;
        let (ek_cur, dk1_cur) = (e[k], d[k + 1]);
        e[k] = c2 * ek_cur + s2 * dk1_cur;
        d[k + 1] = -s2 * ek_cur + c2 * dk1_cur;
        if k + 1 < q {
            let ek1 = e[k + 1];
            y = e[k];
            z = s2 * ek1;
            e[k + 1] = c2 * ek1;
        }
    }
}

/// Solves A x = b by LU with partial pivoting. A must be square.
pub fn solve_dense(a: &CMat, b: &[C64]) -> Result<Vec<C64>, CoreError> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(CoreError::config("solve_dense needs a square system"));
    }
    let mut lu = a.clone();
    let mut x: Vec<C64> = b.to_vec();
    let mut scale = 0.0f64;
    for v in &lu.data {
        scale = scale.max(v.norm());
    }
    if scale == 0.0 {
        return Err(CoreError::SingularArgument);
    }

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = lu.get(k, k).norm();
        for i in k + 1..n {
            let m = lu.get(i, k).norm();
            if m > pivot_mag {
                pivot_mag = m;
                pivot_row = i;
            }
        }
        if pivot_mag <= 1e-14 * scale {
            return Err(CoreError::SingularArgument);
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu.get(k, j);
                lu.set(k, j, lu.get(pivot_row, j));
                lu.set(pivot_row, j, tmp);
            }
            x.swap(k, pivot_row);
        }
        let inv_pivot = lu.get(k, k).finv();
        for i in k + 1..n {
            let factor = lu.get(i, k) * inv_pivot;
            lu.set(i, k, factor);
            for j in k + 1..n {
                let cur = lu.get(i, j);
                lu.set(i, j, cur - factor * lu.get(k, j));
            }
            let xk = x[k];
            x[i] -= factor * xk;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu.get(i, j) * x[j];
        }
        x[i] = s * lu.get(i, i).finv();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn diagonal_matrix_with_phases() {
        let entries = [C64::new(3.0, 4.0), C64::new(0.0, -2.0), C64::new(0.5, 0.0)];
        let a = CMat::from_fn(3, 3, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) });
        let s = singular_values(&a);
        assert!((s[0] - 5.0).abs() < 1e-14);
        assert!((s[1] - 2.0).abs() < 1e-14);
        assert!((s[2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn frobenius_norm_is_preserved() {
        let mut r = stream(11);
        for &(m, n) in &[(7usize, 7usize), (12, 5), (5, 12), (30, 30)] {
            let a = CMat::from_fn(m, n, |_, _| C64::new(r(), r()));
            let frob: f64 = (0..m)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| a.get(i, j).norm_sqr())
                .sum();
            let s = singular_values(&a);
            assert_eq!(s.len(), m.min(n));
            let sum_sq: f64 = s.iter().map(|x| x * x).sum();
            assert!((sum_sq - frob).abs() <= 1e-12 * frob, "{m}x{n}");
            for w in s.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn rank_deficiency_is_resolved() {
        // A = B C with inner dimension 4 gives exactly four nonzero values.
        let mut r = stream(12);
        let b = CMat::from_fn(10, 4, |_, _| C64::new(r(), r()));
        let c = CMat::from_fn(4, 9, |_, _| C64::new(r(), r()));
        let a = CMat::from_fn(10, 9, |i, j| {
            (0..4).map(|k| b.get(i, k) * c.get(k, j)).sum()
        });
        let s = singular_values(&a);
        assert!(s[3] > 1e-3);
        for &v in &s[4..] {
            assert!(v <= 1e-13 * s[0], "trailing value {v:e}");
        }
    }

    #[test]
    fn unitary_invariance_under_phase_and_rotation() {
        let mut r = stream(13);
        let a = CMat::from_fn(8, 6, |_, _| C64::new(r(), r()));
        let before = singular_values(&a);
        // Multiply rows by unit phases and mix two rows with a rotation.
        let mut b = a.clone();
        for i in 0..8 {
            let t = r() * std::f64::consts::PI;
            let phase = C64::new(t.cos(), t.sin());
            for j in 0..6 {
                let v = b.get(i, j);
                b.set(i, j, v * phase);
            }
        }
        let (c, s) = (0.6, 0.8);
        for j in 0..6 {
            let x = b.get(2, j);
            let y = b.get(5, j);
            b.set(2, j, x * c + y * s);
            b.set(5, j, -x * s + y * c);
        }
        let after = singular_values(&b);
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() <= 1e-12 * before[0]);
        }
    }

    #[test]
    fn orthonormal_range_reproduces_a_full_rank_matrix() {
        let mut r = stream(15);
        let a = CMat::from_fn(14, 6, |_, _| C64::new(r(), r()));
        let q = orthonormal_range(&a, 1e-12);
        assert_eq!(q.rows(), 14);
        assert_eq!(q.cols(), 6);
        // Orthonormal columns.
        for j in 0..6 {
            for k in 0..6 {
                let dot: C64 = (0..14).map(|i| q.get(i, j).conj() * q.get(i, k)).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((dot - want).norm() < 1e-13, "gram {j},{k}: {dot}");
            }
        }
        // Projection onto the range leaves the columns untouched.
        for j in 0..6 {
            for i in 0..14 {
                let proj: C64 = (0..6)
                    .map(|k| {
                        let coeff: C64 =
                            (0..14).map(|t| q.get(t, k).conj() * a.get(t, j)).sum();
                        q.get(i, k) * coeff
                    })
                    .sum();
                assert!((proj - a.get(i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn orthonormal_range_truncates_redundant_columns() {
        // Nine columns drawn from a four-dimensional subspace: the basis must
        // come out with exactly four columns and still span every input.
        let mut r = stream(16);
        let b = CMat::from_fn(12, 4, |_, _| C64::new(r(), r()));
        let c = CMat::from_fn(4, 9, |_, _| C64::new(r(), r()));
        let a = CMat::from_fn(12, 9, |i, j| {
            (0..4).map(|k| b.get(i, k) * c.get(k, j)).sum()
        });
        let q = orthonormal_range(&a, 1e-10);
        assert_eq!(q.cols(), 4);
        for j in 0..9 {
            let col_norm: Real =
                (0..12).map(|i| a.get(i, j).norm_sqr()).sum::<Real>().sqrt();
            for i in 0..12 {
                let proj: C64 = (0..4)
                    .map(|k| {
                        let coeff: C64 =
                            (0..12).map(|t| q.get(t, k).conj() * a.get(t, j)).sum();
                        q.get(i, k) * coeff
                    })
                    .sum();
                assert!(
                    (proj - a.get(i, j)).norm() < 1e-10 * col_norm,
                    "column {j} escapes the computed range"
                );
            }
        }
    }

    #[test]
    fn solve_dense_roundtrip() {
        let mut r = stream(14);
        let n = 12;
        let a = CMat::from_fn(n, n, |i, j| {
            C64::new(r(), r()) + if i == j { C64::new(3.0, 0.0) } else { C64::new(0.0, 0.0) }
        });
        let x_true: Vec<C64> = (0..n).map(|_| C64::new(r(), r())).collect();
        let b: Vec<C64> = (0..n)
            .map(|i| (0..n).map(|j| a.get(i, j) * x_true[j]).sum())
            .collect();
        let x = solve_dense(&a, &b).unwrap();
        for (got, want) in x.iter().zip(&x_true) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_solve_reports_failure() {
        let a = CMat::from_fn(3, 3, |i, _| C64::new(i as f64 + 1.0, 0.0));
        let b = vec![C64::new(1.0, 0.0); 3];
        assert!(solve_dense(&a, &b).is_err());
    }

    #[test]
    fn column_normalization_reports_norms() {
        let mut a = CMat::from_fn(4, 2, |i, j| {
            if j == 0 { C64::new((i + 1) as f64, 0.0) } else { C64::new(0.0, 0.0) }
        });
        let norms = a.normalize_columns();
        assert!((norms[0] - 30.0f64.sqrt()).abs() < 1e-14);
        assert_eq!(norms[1], 0.0);
        let mut s = 0.0;
        for i in 0..4 {
            s += a.get(i, 0).norm_sqr();
        }
        assert!((s - 1.0).abs() < 1e-14);
    }
}
