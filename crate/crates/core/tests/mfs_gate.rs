//! Cross-validation of the boundary-collocation search against the analytic
//! disk determinant. The collocation formulation earns its keep here: a
//! formulation change that breaks the dip/floor contrast or drifts the dip
//! location past 1e-4 of the analytic root must fail these tests.

use itraj_core::diskball::{DiskDet, TransmissionDet};
use itraj_core::geometry::{default_layout, layout_mfs, MfsLayout, Shape};
use itraj_core::mfs::{find_ide, find_ite, misfit, misfit_dirichlet, SearchControl};
use itraj_core::{C64, Real};

const J01: Real = 2.404825557695773;

fn disk_layout() -> MfsLayout {
    let shape = Shape::Disk { radius: 1.0 };
    let (m, mi, ri, rs) = default_layout(&shape);
    layout_mfs(&shape, m, mi, ri, rs).unwrap()
}

/// First real eigenvalue of the radial determinant at the given index, by
/// bisection on the real axis.
fn first_real_eigenvalue(n: Real, lo0: Real, hi0: Real) -> Real {
    let det = DiskDet { p: 0 };
    let f = |k: Real| det.eval(C64 { re: k, im: 0.0 }, n).unwrap().value.re;
    let (mut lo, mut hi) = (lo0, hi0);
    assert!(
        f(lo) * f(hi) < 0.0,
        "bracket [{lo0}, {hi0}] does not straddle a root at n={n}"
    );
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Complex eigenvalue of the radial determinant near the seed, by Newton
/// iteration with the analytic derivative.
fn complex_eigenvalue(n: Real, seed: C64) -> C64 {
    let det = DiskDet { p: 0 };
    let mut k = seed;
    for _ in 0..60 {
        let e = det.eval(k, n).unwrap();
        let step = e.value * e.d_kappa.finv();
        k -= step;
        if step.norm() < 1e-13 * (1.0 + k.norm()) {
            break;
        }
    }
    k
}

#[test]
fn sigma_contrast_between_eigenvalue_and_generic_point() {
    let layout = disk_layout();
    let ite = first_real_eigenvalue(4.0, 3.2, 3.6);
    let dip = misfit(&layout, C64 { re: ite, im: 0.0 }, 4.0).unwrap();
    let floor = misfit(&layout, C64 { re: 1.0, im: 0.0 }, 4.0).unwrap();
    assert!(dip < 1e-5, "dip too shallow at the analytic eigenvalue: {dip:e}");
    assert!(floor > 1e-2, "floor collapsed at a generic point: {floor:e}");
}

#[test]
fn complex_search_matches_the_analytic_determinant() {
    let layout = disk_layout();
    for (n, seed) in [
        (2.0, C64 { re: 3.2, im: 1.3 }),
        (4.0, C64 { re: 2.1, im: 0.5 }),
        (8.0, C64 { re: 1.9, im: 0.2 }),
    ] {
        let exact = complex_eigenvalue(n, seed);
        let residual = DiskDet { p: 0 }.eval(exact, n).unwrap();
        assert!(
            residual.value.norm() <= 1e-10 * residual.scale,
            "analytic polish failed at n={n}"
        );
        let offset = C64 { re: 0.03, im: -0.02 };
        let found = find_ite(&layout, n, exact + offset, &SearchControl::default()).unwrap();
        assert!(
            (found - exact).norm() < 1e-4,
            "n={n}: collocation {found:?} vs analytic {exact:?}, offset {:e}",
            (found - exact).norm()
        );
    }
}

#[test]
fn dirichlet_search_lands_on_the_drum_tone() {
    let layout = disk_layout();
    let k = find_ide(&layout, 2.3, &SearchControl::default()).unwrap();
    assert!(
        (k - J01).abs() < 1e-3,
        "disk Dirichlet eigenvalue off: {k} vs {J01}"
    );
}

#[test]
fn square_dirichlet_tone_matches_the_closed_form() {
    let shape = Shape::Square { side: 1.0 };
    let (m, mi, ri, rs) = default_layout(&shape);
    let layout = layout_mfs(&shape, m, mi, ri, rs).unwrap();
    let want = std::f64::consts::PI * 2f64.sqrt();
    let k = find_ide(&layout, 4.4, &SearchControl::default()).unwrap();
    assert!(
        (k - want).abs() < 1e-3,
        "square Dirichlet eigenvalue off: {k} vs {want}"
    );
}

#[test]
fn misfit_is_rotation_equivariant() {
    let layout = disk_layout();
    let phi: Real = 0.3;
    let (c, s) = (phi.cos(), phi.sin());
    let rot2 = |v: [Real; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
    let rotated = MfsLayout {
        boundary: layout
            .boundary
            .iter()
            .map(|b| itraj_core::geometry::BoundaryPoint {
                pos: rot2(b.pos),
                normal: rot2(b.normal),
            })
            .collect(),
        interior: layout.interior.iter().map(|&p| rot2(p)).collect(),
        sources: layout.sources.iter().map(|&p| rot2(p)).collect(),
    };
    for (re, im) in [(2.5, 0.0), (3.0, 0.5), (1.7, 1.1)] {
        let a = misfit(&layout, C64 { re, im }, 4.0).unwrap();
        let b = misfit(&rotated, C64 { re, im }, 4.0).unwrap();
        assert!(
            (a - b).abs() <= 1e-9,
            "rotation moved the misfit at {re}+{im}i: {a} vs {b}"
        );
    }
}
