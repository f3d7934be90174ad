//! Executes an experiment: one task per angular order or seed (plus an
//! optional Dirichlet tone scan), distributed over a worker pool. Each
//! task yields the upper-half branch; the conjugate file is its mirror,
//! which both solvers honor exactly. A failed task leaves a marker in
//! the events sidecar and suppresses only its own files.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use itraj_core::diskball::{BallDet, DiskDet, TransmissionDet};
use itraj_core::geometry::{default_layout, layout_mfs, MfsLayout};
use itraj_core::mfs::{self, SearchControl};
use itraj_core::trajectory::{
    continue_trajectory, point_residual, seed_smallest_re, StepControl, Trajectory,
};
use itraj_core::{CoreError, Real, C64};

use crate::config::{ExperimentConfig, ScattererSpec, Solver};
use crate::record::{Record, RecordEvent, RecordMeta, Sidecar, SidecarEntry};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Window the analytic seeder scans for the smallest-real-part zero at
/// the starting index. Wide enough for the first pair of every order
/// and shape in use; zeros of later pairs have larger real parts and
/// lose the smallest-Re tie-break.
const SEED_RE_WINDOW: (Real, Real) = (0.5, 10.0);
const SEED_IM_WINDOW: (Real, Real) = (0.05, 4.0);

#[derive(Debug, Clone)]
enum Task {
    Mode(u32),
    Seed(usize),
    Scan,
}

enum TaskData {
    Branch {
        start: String,
        end: Real,
        rows: Vec<[Real; 4]>,
        events: Vec<RecordEvent>,
    },
    Tones(Vec<(Real, Real)>),
}

#[derive(Debug)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub sidecar: Option<PathBuf>,
    /// One line per failed task: branch name and solver error.
    pub failures: Vec<String>,
}

pub fn branch_bases(config: &ExperimentConfig) -> Vec<String> {
    match config.solver {
        Solver::Analytic => config.modes.iter().map(|p| format!("p{p}")).collect(),
        Solver::Mfs => config
            .seeds
            .iter()
            .enumerate()
            .map(|(i, s)| s.label.clone().unwrap_or_else(|| format!("seed{}", i + 1)))
            .collect(),
    }
}

pub fn branch_path(dir: &Path, config: &ExperimentConfig, base: &str, sign: &str) -> PathBuf {
    dir.join(format!("{}.{base}-{sign}.dat", config.name))
}

pub fn sidecar_path(dir: &Path, config: &ExperimentConfig) -> PathBuf {
    dir.join(format!("{}.events.json", config.name))
}

pub fn run(config: &ExperimentConfig, out_dir: &Path, threads: usize) -> Result<RunSummary, CliError> {
    config.validate()?;
    let mut tasks: Vec<Task> = match config.solver {
        Solver::Analytic => config.modes.iter().map(|&p| Task::Mode(p)).collect(),
        Solver::Mfs => (0..config.seeds.len()).map(Task::Seed).collect(),
    };
    if config.dirichlet_scan.is_some() {
        tasks.push(Task::Scan);
    }
    if tasks.is_empty() {
        return Ok(RunSummary {
            files: vec![],
            sidecar: None,
            failures: vec![],
        });
    }
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    let workers = if threads == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        threads
    }
    .min(tasks.len())
    .max(1);
    let slots: Vec<Mutex<Option<Result<TaskData, String>>>> =
        tasks.iter().map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let data = execute(config, &tasks[i]).map_err(|e| e.to_string());
                *slots[i].lock().unwrap() = Some(data);
            });
        }
    });

    let mut files = Vec::new();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (task, slot) in tasks.iter().zip(slots) {
        let base = match task {
            Task::Mode(p) => format!("p{p}"),
            Task::Seed(i) => branch_bases(config)[*i].clone(),
            Task::Scan => "tones".to_string(),
        };
        let outcome = slot.into_inner().unwrap().expect("worker filled every slot");
        match outcome {
            Ok(TaskData::Branch {
                start,
                end,
                rows,
                events,
            }) => {
                let plus = Record {
                    meta: RecordMeta {
                        version: VERSION.to_string(),
                        run: config.name.clone(),
                        scatterer: config.scatterer.label(),
                        solver: match config.solver {
                            Solver::Analytic => "analytic".to_string(),
                            Solver::Mfs => "mfs".to_string(),
                        },
                        branch: format!("{base}-plus"),
                        start,
                        range: format!(
                            "lo={} hi={} step={}",
                            config.range.n_lo, end, config.range.step
                        ),
                        columns: match config.solver {
                            Solver::Analytic => "n re_kappa im_kappa residual".to_string(),
                            Solver::Mfs => "n re_kappa im_kappa misfit".to_string(),
                        },
                    },
                    rows,
                    events,
                };
                let minus = plus.mirrored(format!("{base}-minus"));
                for (sign, record) in [("plus", &plus), ("minus", &minus)] {
                    let path = branch_path(out_dir, config, &base, sign);
                    record.write(&path)?;
                    for ev in &record.events {
                        entries.push(SidecarEntry::Touch {
                            branch: record.meta.branch.clone(),
                            index: ev.index,
                            n: ev.n,
                            kappa: ev.kappa,
                        });
                    }
                    files.push(path);
                }
            }
            Ok(TaskData::Tones(tones)) => {
                for (kappa, misfit) in tones {
                    entries.push(SidecarEntry::Dirichlet { kappa, misfit });
                }
            }
            Err(message) => {
                failures.push(format!("{base}: {message}"));
                entries.push(SidecarEntry::Failure {
                    branch: base,
                    message,
                });
            }
        }
    }
    let sidecar = Sidecar {
        run: config.name.clone(),
        version: VERSION.to_string(),
        entries,
    };
    let sidecar_file = sidecar_path(out_dir, config);
    sidecar.write(&sidecar_file)?;
    Ok(RunSummary {
        files,
        sidecar: Some(sidecar_file),
        failures,
    })
}

fn execute(config: &ExperimentConfig, task: &Task) -> Result<TaskData, CoreError> {
    match (task, &config.scatterer) {
        (Task::Mode(p), ScattererSpec::Disk { .. }) => analytic_branch(config, &DiskDet { p: *p }),
        (Task::Mode(p), ScattererSpec::Ball { .. }) => analytic_branch(config, &BallDet { p: *p }),
        (Task::Mode(_), _) => Err(CoreError::UnsupportedShape),
        (Task::Seed(i), _) => mfs_branch(config, *i),
        (Task::Scan, _) => scan_tones(config),
    }
}

fn search_control(config: &ExperimentConfig) -> SearchControl {
    SearchControl {
        simplex_radius: config.tolerance("simplex_radius"),
        accept_misfit: config.tolerance("accept_misfit"),
        min_diameter: config.tolerance("min_diameter"),
        max_evals: config.tolerance("max_evals") as usize,
        min_abs_kappa: config.tolerance("min_abs_kappa"),
    }
}

fn mfs_layout(config: &ExperimentConfig) -> Result<MfsLayout, CoreError> {
    let shape = config
        .scatterer
        .shape()
        .ok_or(CoreError::UnsupportedShape)?;
    let (m, m_interior, interior_radius, source_radius) = default_layout(&shape);
    layout_mfs(&shape, m, m_interior, interior_radius, source_radius)
}

/// Continuation of one angular order from the seed index toward both
/// range ends, stitched into a single ascending-in-n branch. Mandatory
/// landings are split between the legs; a landing exactly at the seed
/// index is already a row.
fn analytic_branch<D: TransmissionDet>(
    config: &ExperimentConfig,
    det: &D,
) -> Result<TaskData, CoreError> {
    let r = &config.range;
    let seed = seed_smallest_re(det, r.n_seed, SEED_RE_WINDOW, SEED_IM_WINDOW)?;
    let ctrl = StepControl {
        initial_step: r.step,
        min_step: config.tolerance("min_step"),
        max_step: config.tolerance("max_step"),
        ..StepControl::default()
    };
    let margin = 1e-12 * r.n_seed.max(1.0);
    let down = if r.n_lo < r.n_seed - margin {
        let mut leg = ctrl.clone();
        leg.mandatory = config
            .mandatory
            .iter()
            .copied()
            .filter(|&m| m < r.n_seed)
            .collect();
        Some(continue_trajectory(det, seed, r.n_lo, &leg)?)
    } else {
        None
    };
    let up = if r.n_hi > r.n_seed + margin {
        let mut leg = ctrl.clone();
        leg.mandatory = config
            .mandatory
            .iter()
            .copied()
            .filter(|&m| m > r.n_seed)
            .collect();
        Some(continue_trajectory(det, seed, r.n_hi, &leg)?)
    } else {
        None
    };

    let mut traj = stitch(down, up, seed.n, seed.kappa);
    traj.events.sort_by_key(|e| e.touch_index);
    let mut rows = Vec::with_capacity(traj.points.len());
    for (i, point) in traj.points.iter().enumerate() {
        // On-axis touch rows carry residual 0: both determinant factors
        // vanish there, so the scaled quotient is pure noise, while the
        // refined point itself is exact to rounding.
        let residual = if traj.events.iter().any(|e| e.touch_index == i) {
            0.0
        } else {
            point_residual(det, point)?
        };
        rows.push([point.n, point.kappa.re, point.kappa.im, residual]);
    }
    let events = traj
        .events
        .iter()
        .map(|e| RecordEvent {
            index: e.touch_index,
            n: e.n_star,
            kappa: e.kappa_star,
        })
        .collect();
    Ok(TaskData::Branch {
        start: format!("p={} n={}", det.order(), r.n_seed),
        end: r.n_hi,
        rows,
        events,
    })
}

/// Joins a downward and an upward leg sharing the seed point into one
/// ascending branch. Touch indices are remapped: reversing the down leg
/// sends its index i to len-1-i, and the up leg is shifted past it.
fn stitch(
    down: Option<Trajectory>,
    up: Option<Trajectory>,
    seed_n: Real,
    seed_kappa: C64,
) -> Trajectory {
    match (down, up) {
        (Some(d), Some(u)) => {
            let len = d.points.len();
            let mut points: Vec<_> = d.points.iter().rev().copied().collect();
            points.pop();
            points.extend(u.points.iter().copied());
            let mut events = Vec::new();
            for ev in &d.events {
                events.push(itraj_core::trajectory::CrossingEvent {
                    touch_index: len - 1 - ev.touch_index,
                    ..*ev
                });
            }
            for ev in &u.events {
                events.push(itraj_core::trajectory::CrossingEvent {
                    touch_index: len - 1 + ev.touch_index,
                    ..*ev
                });
            }
            Trajectory { points, events }
        }
        (Some(d), None) => {
            let len = d.points.len();
            let points: Vec<_> = d.points.iter().rev().copied().collect();
            let events = d
                .events
                .iter()
                .map(|ev| itraj_core::trajectory::CrossingEvent {
                    touch_index: len - 1 - ev.touch_index,
                    ..*ev
                })
                .collect();
            Trajectory { points, events }
        }
        (None, Some(u)) => u,
        (None, None) => Trajectory {
            points: vec![itraj_core::trajectory::TrajectoryPoint {
                n: seed_n,
                kappa: seed_kappa,
            }],
            events: vec![],
        },
    }
}

/// Marches one collocation seed up the index grid. Rows keep the
/// upper-half representative of each located eigenvalue; the misfit is
/// re-evaluated at the recorded position.
fn mfs_branch(config: &ExperimentConfig, index: usize) -> Result<TaskData, CoreError> {
    let layout = mfs_layout(config)?;
    let ctrl = search_control(config);
    let spec = &config.seeds[index];
    let seed = C64::new(spec.re, spec.im.abs());
    let end = config.seed_end(index);
    let path = mfs::continue_ite(&layout, seed, config.range.n_seed, end, config.range.step, &ctrl)?;
    let mut rows = Vec::with_capacity(path.len());
    for (n, kappa) in path {
        let k = if kappa.im < 0.0 { kappa.conj() } else { kappa };
        rows.push([n, k.re, k.im, mfs::misfit(&layout, k, n)?]);
    }
    Ok(TaskData::Branch {
        start: format!("kappa={}{:+}i n={}", spec.re, spec.im.abs(), config.range.n_seed),
        end,
        rows,
        events: vec![],
    })
}

/// Sweeps the single-field misfit along the real axis and refines every
/// interior dip into a Dirichlet tone. Grid minima above 0.5 are
/// ambient-level noise, not dips.
fn scan_tones(config: &ExperimentConfig) -> Result<TaskData, CoreError> {
    let scan = config.dirichlet_scan.as_ref().expect("scan task exists");
    let layout = mfs_layout(config)?;
    let ctrl = search_control(config);
    let step = config.tolerance("ide_scan_step");
    let count = ((scan.hi - scan.lo) / step).ceil() as usize + 1;
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let k = (scan.lo + step * i as Real).min(scan.hi);
        values.push((k, mfs::misfit_dirichlet(&layout, C64::new(k, 0.0))?));
    }
    let mut tones: Vec<(Real, Real)> = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (k, v) = values[i];
        if v < 0.5 && v <= values[i - 1].1 && v <= values[i + 1].1 {
            match mfs::find_ide(&layout, k, &ctrl) {
                Ok(tone) => {
                    let misfit = mfs::misfit_dirichlet(&layout, C64::new(tone, 0.0))?;
                    if !tones.iter().any(|(t, _)| (t - tone).abs() < 1e-6) {
                        tones.push((tone, misfit));
                    }
                }
                Err(CoreError::MinimizerStalled { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    tones.sort_by(|a, b| a.0.total_cmp(&b.0));
    tones.truncate(scan.count);
    if tones.len() < scan.count {
        return Err(CoreError::domain(format!(
            "tone scan found {} of {} requested tones in [{}, {}]",
            tones.len(),
            scan.count,
            scan.lo,
            scan.hi
        )));
    }
    Ok(TaskData::Tones(tones))
}
