//! Built-in experiment definitions, one per benchmark figure. fig1 to
//! fig3 drive the analytic determinants; fig4 to fig7 drive the
//! collocation search on shapes without separated solutions.

use std::collections::BTreeMap;

use crate::config::{
    DirichletScan, ExperimentConfig, RangeSpec, ScattererSpec, SeedSpec, Solver,
};

pub const NAMES: &[&str] = &["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => "unit disk, analytic, orders 0..2, n in [1.1, 16]",
        "fig2" => "unit disk below index one, analytic, order 0, n in [0.05, 1/1.1]",
        "fig3" => "unit ball, analytic, orders 0..2, n in [1.1, 16]",
        "fig4" => "ellipse 1 x 0.5, collocation, seeds 4+i and 5+i, n in [4, 32]",
        "fig5" => "unit square, collocation, seeds 4.5+i and 7+i, n up to 32 and 20",
        "fig6" => "equilateral triangle side 1, collocation, seeds 7.3+1.5i and 11+2i",
        "fig7" => "deformed ellipse, collocation, seeds 3+0.8i and 4+0.8i, plus a tone scan",
        _ => return None,
    })
}

/// Index values common to the direct disk run and, reciprocally, to the
/// inverse one. Row-exact landings let the two data sets be compared
/// point against point under the reciprocal-index symmetry.
pub fn symmetry_grid() -> Vec<f64> {
    vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
}

pub fn get(name: &str) -> Option<ExperimentConfig> {
    let disk = ScattererSpec::Disk { radius: 1.0 };
    let config = match name {
        "fig1" => ExperimentConfig {
            name: "fig1".into(),
            solver: Solver::Analytic,
            scatterer: disk,
            range: RangeSpec {
                n_seed: 2.0,
                n_lo: 1.1,
                n_hi: 16.0,
                step: 0.01,
            },
            modes: vec![0, 1, 2],
            seeds: vec![],
            mandatory: symmetry_grid(),
            dirichlet_scan: None,
            out_dir: None,
            tolerances: BTreeMap::new(),
        },
        "fig2" => ExperimentConfig {
            name: "fig2".into(),
            solver: Solver::Analytic,
            scatterer: disk,
            range: RangeSpec {
                n_seed: 0.5,
                n_lo: 0.05,
                n_hi: 1.0 / 1.1,
                step: 0.01,
            },
            modes: vec![0],
            seeds: vec![],
            mandatory: symmetry_grid().iter().map(|n| 1.0 / n).collect(),
            dirichlet_scan: None,
            out_dir: None,
            tolerances: BTreeMap::new(),
        },
        "fig3" => ExperimentConfig {
            name: "fig3".into(),
            solver: Solver::Analytic,
            scatterer: ScattererSpec::Ball { radius: 1.0 },
            range: RangeSpec {
                n_seed: 2.0,
                n_lo: 1.1,
                n_hi: 16.0,
                step: 0.01,
            },
            modes: vec![0, 1, 2],
            seeds: vec![],
            mandatory: vec![],
            dirichlet_scan: None,
            out_dir: None,
            tolerances: BTreeMap::new(),
        },
        "fig4" => ExperimentConfig {
            name: "fig4".into(),
            solver: Solver::Mfs,
            scatterer: ScattererSpec::Ellipse { a: 1.0, b: 0.5 },
            range: RangeSpec {
                n_seed: 4.0,
                n_lo: 4.0,
                n_hi: 32.0,
                step: 0.25,
            },
            modes: vec![],
            seeds: vec![seed(4.0, 1.0, None), seed(5.0, 1.0, None)],
            mandatory: vec![],
            dirichlet_scan: None,
            out_dir: None,
            tolerances: BTreeMap::new(),
        },
        "fig5" => ExperimentConfig {
            name: "fig5".into(),
            solver: Solver::Mfs,
            scatterer: ScattererSpec::Square { side: 1.0 },
            range: RangeSpec {
                n_seed: 4.0,
                n_lo: 4.0,
                n_hi: 32.0,
                step: 0.25,
            },
            modes: vec![],
            seeds: vec![seed(4.5, 1.0, None), seed(7.0, 1.0, Some(20.0))],
            mandatory: vec![],
            dirichlet_scan: None,
            out_dir: None,
            tolerances: BTreeMap::new(),
        },
        "fig6" => ExperimentConfig {
            name: "fig6".into(),
            solver: Solver::Mfs,
            scatterer: ScattererSpec::EquilateralTriangle { side: 1.0 },
            range: RangeSpec {
                n_seed: 4.0,
                n_lo: 4.0,
                n_hi: 32.0,
                step: 0.25,
            },
            modes: vec![],
            seeds: vec![seed(7.3, 1.5, None), seed(11.0, 2.0, Some(16.0))],
            mandatory: vec![],
            dirichlet_scan: None,
            out_dir: None,
            tolerances: BTreeMap::new(),
        },
        "fig7" => ExperimentConfig {
            name: "fig7".into(),
            solver: Solver::Mfs,
            scatterer: ScattererSpec::DeformedEllipse,
            range: RangeSpec {
                n_seed: 4.0,
                n_lo: 4.0,
                n_hi: 32.0,
                step: 0.25,
            },
            modes: vec![],
            seeds: vec![seed(3.0, 0.8, None), seed(4.0, 0.8, Some(20.0))],
            mandatory: vec![],
            dirichlet_scan: Some(DirichletScan {
                lo: 2.2,
                hi: 4.8,
                count: 2,
            }),
            out_dir: None,
            tolerances: BTreeMap::new(),
        },
        _ => return None,
    };
    Some(config)
}

fn seed(re: f64, im: f64, n_hi: Option<f64>) -> SeedSpec {
    SeedSpec {
        re,
        im,
        n_hi,
        label: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for &name in NAMES {
            let config = get(name).unwrap();
            config.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(config.name, name);
            assert!(describe(name).is_some());
        }
        assert!(get("fig8").is_none());
    }

    #[test]
    fn symmetry_grids_are_reciprocal_images() {
        let direct = get("fig1").unwrap();
        let inverse = get("fig2").unwrap();
        for (d, i) in direct.mandatory.iter().zip(&inverse.mandatory) {
            assert_eq!(1.0 / d, *i);
        }
        // Landings must stay clear of the touch guard around each axis
        // crossing, or the marcher drops them and the row comparison
        // loses its anchor.
        for touch in [5.26896, 12.94909] {
            for &m in &direct.mandatory {
                assert!((m - touch).abs() > 5e-3, "{m} vs {touch}");
            }
        }
        for touch in [0.18979, 0.077226] {
            for &m in &inverse.mandatory {
                assert!((m - touch).abs() > 5e-3, "{m} vs {touch}");
            }
        }
    }
}
