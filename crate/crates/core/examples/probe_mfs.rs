use itraj_core::geometry::{default_layout, layout_mfs, MfsLayout, Shape};
use itraj_core::mfs::misfit;
use itraj_core::{C64, Real};

// Compass search with expansion and contraction: robust on the narrow
// cone-shaped dips the misfit has, no simplex to wander.
fn descend(layout: &MfsLayout, n: Real, start: C64, h0: Real) -> (C64, Real, usize) {
    let mut x = start;
    let mut fx = misfit(layout, x, n).unwrap_or(1.0);
    let mut h = h0;
    let mut evals = 1;
    while h > 1e-9 && evals < 900 {
        let dirs = [
            C64::new(h, 0.0),
            C64::new(-h, 0.0),
            C64::new(0.0, h),
            C64::new(0.0, -h),
            C64::new(h, h),
            C64::new(h, -h),
            C64::new(-h, h),
            C64::new(-h, -h),
        ];
        let mut best = (fx, x);
        for d in dirs {
            let y = x + d;
            let fy = misfit(layout, y, n).unwrap_or(1.0);
            evals += 1;
            if fy < best.0 {
                best = (fy, y);
            }
        }
        if best.0 < fx {
            x = best.1;
            fx = best.0;
            h = (h * 1.6).min(h0);
        } else {
            h *= 0.35;
        }
    }
    (x, fx, evals)
}

fn track(tag: &str, shape: &Shape, seed: C64, n_hi: Real) {
    let (m, mi, ri, rs) = default_layout(shape);
    let layout = layout_mfs(shape, m, mi, ri, rs).unwrap();
    let mut path: Vec<(Real, C64)> = Vec::new();
    let mut n = 4.0;
    let mut worst: (Real, Real) = (0.0, 0.0);
    while n <= n_hi + 1e-9 {
        let guess = match path.len() {
            0 => seed,
            1 => path[0].1,
            _ => {
                let (pn, pk) = path[path.len() - 1];
                let (qn, qk) = path[path.len() - 2];
                pk + (pk - qk) * ((n - pn) / (pn - qn))
            }
        };
        let h0 = if path.is_empty() { 0.08 } else { 0.03 };
        let (k, f, evals) = descend(&layout, n, guess, h0);
        let jump = path.last().map_or(0.0, |(_, pk)| (k - pk).norm());
        if f > worst.1 {
            worst = (n, f);
        }
        println!(
            "{tag} n={n:6.2} kappa=({:+.6},{:+.6}) misfit={f:9.3e} evals={evals:3} jump={jump:.3}",
            k.re, k.im
        );
        path.push((n, k));
        n += 0.25;
    }
    println!("{tag} worst floor {:.3e} at n={:.2}", worst.1, worst.0);
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");
    let ell = Shape::Ellipse { a: 1.0, b: 0.5 };
    let sq = Shape::Square { side: 1.0 };
    let tri = Shape::EquilateralTriangle { side: 1.0 };
    let def = Shape::DeformedEllipse;
    let runs: Vec<(&str, &Shape, C64, Real)> = vec![
        ("ell-1", &ell, C64::new(4.0, 1.0), 32.0),
        ("ell-2", &ell, C64::new(5.0, 1.0), 32.0),
        ("sq-1", &sq, C64::new(4.5, 1.0), 32.0),
        ("sq-2", &sq, C64::new(7.0, 1.0), 20.0),
        ("tri-1", &tri, C64::new(7.3, 1.5), 32.0),
        ("tri-2", &tri, C64::new(11.0, 2.0), 16.0),
        ("def-1", &def, C64::new(3.0, 0.8), 32.0),
        ("def-2", &def, C64::new(4.0, 0.8), 20.0),
    ];
    for (tag, shape, seed, n_hi) in runs {
        if which == "all" || which == tag {
            track(tag, shape, seed, n_hi);
        }
    }
}
