//! Gauss-Legendre quadrature nodes, shared by the radial energy integrals and the
//! contour moments.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Computed by Newton iteration on the Legendre polynomial with Chebyshev-like
/// initial guesses; nodes are accurate to rounding for n up to several hundred.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "empty quadrature rule");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // One clean-up step; the weight uses the fully converged node.
        let (p, d) = legendre_with_derivative(n, x);
        x -= p / d;
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x` via the three-term
/// recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let d = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for &n in &[1, 2, 3, 7, 20, 64, 200] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: sum = {s}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        // n-point rule integrates x^k exactly for k <= 2n-1; moments of [-1,1] are
        // 0 for odd k and 2/(k+1) for even k.
        for &n in &[2usize, 5, 8, 13] {
            let (x, w) = gauss_legendre(n);
            for k in 0..=(2 * n - 1) {
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!(
                    (approx - exact).abs() < 2e-14,
                    "n = {n}, k = {k}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn smooth_integrand_on_unit_interval() {
        // int_0^1 sin(3 r) r dr = (sin 3 - 3 cos 3) / 9
        let (r, w) = gauss_legendre_on(200, 0.0, 1.0);
        let got: f64 = r.iter().zip(&w).map(|(ri, wi)| wi * (3.0 * ri).sin() * ri).sum();
        let exact = ((3.0f64).sin() - 3.0 * (3.0f64).cos()) / 9.0;
        assert!((got - exact).abs() < 1e-14);
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        let (x, _) = gauss_legendre(31);
        for i in 0..x.len() - 1 {
            assert!(x[i] < x[i + 1]);
        }
        for i in 0..x.len() {
            assert!((x[i] + x[x.len() - 1 - i]).abs() < 1e-15);
        }
    }
}
