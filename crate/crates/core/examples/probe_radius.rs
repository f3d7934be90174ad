use itraj_core::geometry::{layout_mfs, MfsLayout, Shape};
use itraj_core::mfs::misfit;
use itraj_core::{C64, Real};

fn descend(layout: &MfsLayout, n: Real, start: C64, h0: Real) -> (C64, Real) {
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
    (x, fx)
}

// Floor of the first-trajectory dip for the 2:1 ellipse as a function of the
// source circle radius, at a few checkpoints along the spiral. Positions of
// the dips are layout-independent; only the depth changes.
fn main() {
    let shape = Shape::Ellipse { a: 1.0, b: 0.5 };
    let checkpoints = [
        (10.0, C64::new(3.873, 0.658)),
        (16.0, C64::new(3.70, 0.48)),
        (24.0, C64::new(3.72, 0.33)),
        (32.0, C64::new(3.76, 0.26)),
    ];
    for &rs in &[1.2_f64, 1.5, 2.0, 3.0, 4.0] {
        for &(mi, ri) in &[(10usize, 0.4_f64), (20, 0.25)] {
            let layout = layout_mfs(&shape, 40, mi, ri, rs).unwrap();
            print!("rs={rs:3.1} mi={mi:2} ri={ri:4.2}:");
            for (n, guess) in checkpoints {
                let (k, f) = descend(&layout, n, guess, 0.06);
                print!("  n={n:4.1} ({:+.4},{:+.4}) {f:9.3e}", k.re, k.im);
            }
            println!();
        }
    }
}
