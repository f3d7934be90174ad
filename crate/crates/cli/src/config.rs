//! Experiment configuration: scatterer, solver, index range, and what to
//! continue (angular orders for the analytic determinants, complex seeds
//! for the collocation search). Loadable from TOML; every invariant that
//! would otherwise surface as a confusing solver error is rejected here.

use std::collections::BTreeMap;
use std::path::Path;

use itraj_core::geometry::Shape;
use itraj_core::Real;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Separated determinant of the unit disk or unit ball.
    Analytic,
    /// Boundary-collocation misfit search, any supported planar shape.
    Mfs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScattererSpec {
    Disk { radius: Real },
    Ball { radius: Real },
    Ellipse { a: Real, b: Real },
    Square { side: Real },
    EquilateralTriangle { side: Real },
    DeformedEllipse,
}

impl ScattererSpec {
    /// Planar geometry for the collocation solver. The ball has none.
    pub fn shape(&self) -> Option<Shape> {
        match *self {
            ScattererSpec::Disk { radius } => Some(Shape::Disk { radius }),
            ScattererSpec::Ball { .. } => None,
            ScattererSpec::Ellipse { a, b } => Some(Shape::Ellipse { a, b }),
            ScattererSpec::Square { side } => Some(Shape::Square { side }),
            ScattererSpec::EquilateralTriangle { side } => {
                Some(Shape::EquilateralTriangle { side })
            }
            ScattererSpec::DeformedEllipse => Some(Shape::DeformedEllipse),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ScattererSpec::Disk { radius } => format!("disk radius={radius}"),
            ScattererSpec::Ball { radius } => format!("ball radius={radius}"),
            ScattererSpec::Ellipse { a, b } => format!("ellipse a={a} b={b}"),
            ScattererSpec::Square { side } => format!("square side={side}"),
            ScattererSpec::EquilateralTriangle { side } => {
                format!("equilateral-triangle side={side}")
            }
            ScattererSpec::DeformedEllipse => "deformed-ellipse".to_string(),
        }
    }
}

/// Index interval and marching grid. Trajectories are seeded at `n_seed`
/// and continued toward both ends, so `n_lo <= n_seed <= n_hi`; the whole
/// interval must stay on one side of one, where the problem degenerates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub n_seed: Real,
    pub n_lo: Real,
    pub n_hi: Real,
    pub step: Real,
}

/// One independent starting guess for the collocation search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub re: Real,
    pub im: Real,
    /// March end for this seed alone; defaults to the range end.
    #[serde(default)]
    pub n_hi: Option<Real>,
    /// Branch name used in output files; defaults to seed1, seed2, ...
    #[serde(default)]
    pub label: Option<String>,
}

/// Real-axis sweep of the single-field collocation misfit, locating the
/// lowest Dirichlet wavenumbers of the scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletScan {
    pub lo: Real,
    pub hi: Real,
    pub count: usize,
}

/// Tolerance keys accepted in the `[tolerances]` table and via
/// `--tolerance KEY=VAL`, with their defaults. Marching and search knobs
/// feed the solvers; the rest are verification gates.
pub const TOLERANCE_KEYS: &[(&str, Real)] = &[
    ("min_step", 1e-5),
    ("max_step", 0.1),
    ("accept_misfit", 1e-4),
    ("simplex_radius", 0.05),
    ("min_diameter", 1e-8),
    ("max_evals", 300.0),
    ("min_abs_kappa", 0.5),
    ("ide_scan_step", 0.02),
    ("row_residual", 1e-6),
    ("crossing_match", 1e-6),
    ("angle_window", 0.05),
    ("multiplicity_radius", 0.2),
    ("energy_rel", 1e-8),
    ("identity_residual", 1e-9),
    ("simultaneity_residual", 1e-12),
    ("symmetry_match", 1e-6),
    ("ide_terminal", 0.15),
    ("spiral_from", 0.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Run name; prefixes every output file.
    pub name: String,
    pub solver: Solver,
    pub scatterer: ScattererSpec,
    pub range: RangeSpec,
    /// Angular orders to continue (analytic solver only).
    #[serde(default)]
    pub modes: Vec<u32>,
    /// Starting guesses to continue (collocation solver only).
    #[serde(default)]
    pub seeds: Vec<SeedSpec>,
    /// Index values every trajectory must land on exactly, so that runs
    /// over related ranges can be compared row against row.
    #[serde(default)]
    pub mandatory: Vec<Real>,
    #[serde(default)]
    pub dirichlet_scan: Option<DirichletScan>,
    /// Default output directory; the --out flag wins over it.
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, Real>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Effective tolerance: the override if present, the default otherwise.
    /// Unknown keys are rejected by `validate`, so this only panics on a
    /// key misspelled in source code.
    pub fn tolerance(&self, key: &str) -> Real {
        if let Some(&v) = self.tolerances.get(key) {
            return v;
        }
        TOLERANCE_KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, v)| v)
            .unwrap_or_else(|| panic!("unknown tolerance key {key}"))
    }

    /// March end for the seed at `index`, capped by its own override.
    pub fn seed_end(&self, index: usize) -> Real {
        self.seeds[index].n_hi.unwrap_or(self.range.n_hi)
    }

    pub fn branch_base(&self, task: &str) -> String {
        format!("{}.{}", self.name, task)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(CliError::config(
                "name must be nonempty and use only letters, digits, '-', '_'",
            ));
        }
        let r = &self.range;
        for (what, v) in [
            ("n_seed", r.n_seed),
            ("n_lo", r.n_lo),
            ("n_hi", r.n_hi),
            ("step", r.step),
        ] {
            if !v.is_finite() {
                return Err(CliError::config(format!("range.{what} must be finite")));
            }
        }
        if !(r.step > 0.0) {
            return Err(CliError::config("range.step must be positive"));
        }
        if !(0.0 < r.n_lo && r.n_lo <= r.n_seed && r.n_seed <= r.n_hi) {
            return Err(CliError::config(
                "range must satisfy 0 < n_lo <= n_seed <= n_hi",
            ));
        }
        // The problem degenerates at index one; keep a guard band around it.
        if !(r.n_hi <= 1.0 - 1e-6 || r.n_lo >= 1.0 + 1e-6) {
            return Err(CliError::config(
                "index range must keep a margin of 1e-6 away from n = 1",
            ));
        }
        for &m in &self.mandatory {
            if !(r.n_lo <= m && m <= r.n_hi) {
                return Err(CliError::config(format!(
                    "mandatory index {m} outside [{}, {}]",
                    r.n_lo, r.n_hi
                )));
            }
        }
        match self.solver {
            Solver::Analytic => self.validate_analytic()?,
            Solver::Mfs => self.validate_mfs()?,
        }
        for (key, &value) in &self.tolerances {
            if !TOLERANCE_KEYS.iter().any(|(k, _)| k == key) {
                return Err(CliError::config(format!("unknown tolerance key {key}")));
            }
            if !value.is_finite() || value < 0.0 {
                return Err(CliError::config(format!(
                    "tolerance {key} must be finite and nonnegative"
                )));
            }
        }
        Ok(())
    }

    fn validate_analytic(&self) -> Result<(), CliError> {
        match self.scatterer {
            ScattererSpec::Disk { radius } | ScattererSpec::Ball { radius } => {
                if radius != 1.0 {
                    return Err(CliError::config(
                        "the analytic determinants cover the unit disk and unit ball only",
                    ));
                }
            }
            _ => {
                return Err(CliError::config(
                    "analytic solver needs a disk or ball scatterer",
                ))
            }
        }
        if !self.seeds.is_empty() {
            return Err(CliError::config(
                "analytic runs take modes, not seeds; use solver = \"mfs\" for seeds",
            ));
        }
        if self.dirichlet_scan.is_some() {
            return Err(CliError::config(
                "dirichlet_scan needs the collocation solver",
            ));
        }
        Ok(())
    }

    fn validate_mfs(&self) -> Result<(), CliError> {
        let shape = self
            .scatterer
            .shape()
            .ok_or_else(|| CliError::config("collocation solver has no ball geometry"))?;
        shape.validate()?;
        if !self.modes.is_empty() {
            return Err(CliError::config(
                "collocation runs take seeds, not modes; use solver = \"analytic\" for modes",
            ));
        }
        if self.range.n_lo != self.range.n_seed {
            return Err(CliError::config(
                "collocation marches upward only: set n_lo = n_seed",
            ));
        }
        if !self.seeds.is_empty() && self.range.n_hi < self.range.n_seed + self.range.step {
            return Err(CliError::config(
                "collocation range is shorter than one marching step",
            ));
        }
        let mut labels = std::collections::BTreeSet::new();
        for (i, s) in self.seeds.iter().enumerate() {
            if !(s.re.is_finite() && s.im.is_finite()) || (s.re == 0.0 && s.im == 0.0) {
                return Err(CliError::config(format!("seed {} must be finite and nonzero", i + 1)));
            }
            if let Some(hi) = s.n_hi {
                if !(self.range.n_seed + self.range.step <= hi && hi <= self.range.n_hi) {
                    return Err(CliError::config(format!(
                        "seed {} n_hi must lie in [n_seed + step, n_hi]",
                        i + 1
                    )));
                }
            }
            if let Some(label) = &s.label {
                if label.is_empty()
                    || !label
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
                {
                    return Err(CliError::config(format!("seed {} label is not a filename", i + 1)));
                }
            }
            let label = s.label.clone().unwrap_or_else(|| format!("seed{}", i + 1));
            if !labels.insert(label.clone()) {
                return Err(CliError::config(format!("duplicate branch label {label}")));
            }
        }
        if let Some(scan) = &self.dirichlet_scan {
            if !(0.0 < scan.lo && scan.lo < scan.hi && scan.hi.is_finite()) {
                return Err(CliError::config("dirichlet_scan needs 0 < lo < hi"));
            }
            if scan.count == 0 {
                return Err(CliError::config("dirichlet_scan.count must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            name: "probe".into(),
            solver: Solver::Analytic,
            scatterer: ScattererSpec::Disk { radius: 1.0 },
            range: RangeSpec {
                n_seed: 2.0,
                n_lo: 1.5,
                n_hi: 6.0,
                step: 0.01,
            },
            modes: vec![0],
            seeds: vec![],
            mandatory: vec![],
            dirichlet_scan: None,
            out_dir: None,
            tolerances: BTreeMap::new(),
        }
    }

    #[test]
    fn toml_round_trip_preserves_the_config() {
        let text = r#"
            name = "probe"
            solver = "mfs"
            modes = []
            mandatory = [4.0]

            [scatterer]
            kind = "square"
            side = 1.0

            [range]
            n_seed = 4.0
            n_lo = 4.0
            n_hi = 8.0
            step = 0.25

            [[seeds]]
            re = 4.5
            im = 1.0

            [[seeds]]
            re = 7.0
            im = 1.0
            n_hi = 6.0
            label = "upper"

            [tolerances]
            accept_misfit = 1e-5
        "#;
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.seeds.len(), 2);
        assert_eq!(config.seed_end(0), 8.0);
        assert_eq!(config.seed_end(1), 6.0);
        assert_eq!(config.tolerance("accept_misfit"), 1e-5);
        assert_eq!(config.tolerance("min_step"), 1e-5);
        let back: ExperimentConfig =
            ExperimentConfig::from_toml_str(&toml::to_string(&config).unwrap()).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn ranges_touching_one_are_rejected() {
        let mut c = base();
        c.range.n_lo = 0.9;
        assert!(c.validate().is_err());
        c.range.n_lo = 1.0 + 1e-9;
        assert!(c.validate().is_err());
        c.range.n_lo = 1.0 + 1e-6;
        c.validate().unwrap();
        c.range = RangeSpec {
            n_seed: 0.5,
            n_lo: 0.1,
            n_hi: 1.0 - 1e-7,
            step: 0.01,
        };
        assert!(c.validate().is_err());
        c.range.n_hi = 1.0 - 1e-6;
        c.validate().unwrap();
    }

    #[test]
    fn solver_and_scatterer_must_agree() {
        let mut c = base();
        c.scatterer = ScattererSpec::Square { side: 1.0 };
        assert!(c.validate().is_err());

        let mut c = base();
        c.scatterer = ScattererSpec::Disk { radius: 2.0 };
        assert!(c.validate().is_err());

        let mut c = base();
        c.solver = Solver::Mfs;
        c.modes.clear();
        c.scatterer = ScattererSpec::Ball { radius: 1.0 };
        assert!(c.validate().is_err());

        let mut c = base();
        c.solver = Solver::Mfs;
        c.modes.clear();
        c.range.n_lo = c.range.n_seed;
        c.seeds.push(SeedSpec {
            re: 0.0,
            im: 0.0,
            n_hi: None,
            label: None,
        });
        assert!(c.validate().is_err());
        c.seeds[0].re = 4.5;
        c.seeds[0].im = 1.0;
        c.validate().unwrap();
    }

    #[test]
    fn unknown_tolerance_keys_are_rejected() {
        let mut c = base();
        c.tolerances.insert("acccept_misfit".into(), 1e-4);
        assert!(c.validate().is_err());
    }
}
