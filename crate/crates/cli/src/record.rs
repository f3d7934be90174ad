//! Trajectory records: delimited text with a '#'-prefixed header, one row
//! per accepted index value, and axis-touch events appended as typed
//! comment rows. Numbers carry 17 significant digits, so a parsed file
//! reproduces the computed doubles bit for bit. Each run also writes one
//! JSON sidecar collecting the events of every branch.

use std::path::Path;

use itraj_core::trajectory::{CrossingEvent, Trajectory, TrajectoryPoint};
use itraj_core::{Real, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_LINE: &str = "itraj trajectory record";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordMeta {
    pub version: String,
    pub run: String,
    pub scatterer: String,
    pub solver: String,
    pub branch: String,
    pub start: String,
    pub range: String,
    /// Column names for the four data fields; the last is `residual`
    /// (analytic determinant, scaled) or `misfit` (collocation).
    pub columns: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordEvent {
    /// Row index of the touch point.
    pub index: usize,
    pub n: Real,
    pub kappa: Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub meta: RecordMeta,
    /// (n, Re kappa, Im kappa, residual or misfit), ascending in n.
    pub rows: Vec<[Real; 4]>,
    pub events: Vec<RecordEvent>,
}

fn fmt(x: Real) -> String {
    format!("{x:.16e}")
}

impl Record {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {FORMAT_LINE}\n"));
        let m = &self.meta;
        for (key, value) in [
            ("version", &m.version),
            ("run", &m.run),
            ("scatterer", &m.scatterer),
            ("solver", &m.solver),
            ("branch", &m.branch),
            ("start", &m.start),
            ("range", &m.range),
            ("columns", &m.columns),
        ] {
            out.push_str(&format!("# {key}: {value}\n"));
        }
        out.push_str(&format!("# rows: {}\n", self.rows.len()));
        for row in &self.rows {
            out.push_str(&format!(
                "{} {} {} {}\n",
                fmt(row[0]),
                fmt(row[1]),
                fmt(row[2]),
                fmt(row[3])
            ));
        }
        for ev in &self.events {
            out.push_str(&format!(
                "# event touch index={} n={} kappa={}\n",
                ev.index,
                fmt(ev.n),
                fmt(ev.kappa)
            ));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Record, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Record::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Record, CliError> {
        let bad = |line: usize, what: &str| CliError::Record {
            path: origin.to_string(),
            line,
            what: what.to_string(),
        };
        let mut fields = std::collections::BTreeMap::new();
        let mut rows: Vec<[Real; 4]> = Vec::new();
        let mut events = Vec::new();
        let mut declared_rows: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                let comment = comment.trim();
                if comment == FORMAT_LINE {
                    continue;
                }
                if let Some(rest) = comment.strip_prefix("event touch ") {
                    let mut index = None;
                    let mut n = None;
                    let mut kappa = None;
                    for part in rest.split_whitespace() {
                        let (key, value) = part
                            .split_once('=')
                            .ok_or_else(|| bad(line, "event field without '='"))?;
                        match key {
                            "index" => index = value.parse::<usize>().ok(),
                            "n" => n = value.parse::<Real>().ok(),
                            "kappa" => kappa = value.parse::<Real>().ok(),
                            _ => return Err(bad(line, "unknown event field")),
                        }
                    }
                    match (index, n, kappa) {
                        (Some(index), Some(n), Some(kappa)) => {
                            events.push(RecordEvent { index, n, kappa })
                        }
                        _ => return Err(bad(line, "incomplete touch event")),
                    }
                } else if let Some((key, value)) = comment.split_once(':') {
                    let key = key.trim().to_string();
                    let value = value.trim().to_string();
                    if key == "rows" {
                        declared_rows = value.parse().ok();
                        if declared_rows.is_none() {
                            return Err(bad(line, "row count is not an integer"));
                        }
                    } else {
                        fields.insert(key, value);
                    }
                } else {
                    return Err(bad(line, "unrecognized comment line"));
                }
                continue;
            }
            let mut row = [0.0; 4];
            let mut count = 0;
            for (slot, token) in row.iter_mut().zip(trimmed.split_whitespace()) {
                *slot = token
                    .parse::<Real>()
                    .map_err(|_| bad(line, "data field is not a number"))?;
                count += 1;
            }
            if count != 4 || trimmed.split_whitespace().count() != 4 {
                return Err(bad(line, "expected exactly 4 data columns"));
            }
            rows.push(row);
        }
        if declared_rows != Some(rows.len()) {
            return Err(bad(0, "declared row count does not match the data"));
        }
        let mut take = |key: &str| {
            fields
                .remove(key)
                .ok_or_else(|| bad(0, &format!("missing header field {key}")))
        };
        let meta = RecordMeta {
            version: take("version")?,
            run: take("run")?,
            scatterer: take("scatterer")?,
            solver: take("solver")?,
            branch: take("branch")?,
            start: take("start")?,
            range: take("range")?,
            columns: take("columns")?,
        };
        for ev in &events {
            if ev.index >= rows.len() {
                return Err(bad(0, "event row index out of range"));
            }
        }
        Ok(Record { meta, rows, events })
    }

    pub fn trajectory(&self) -> Trajectory {
        Trajectory {
            points: self
                .rows
                .iter()
                .map(|r| TrajectoryPoint {
                    n: r[0],
                    kappa: C64::new(r[1], r[2]),
                })
                .collect(),
            events: self
                .events
                .iter()
                .map(|e| CrossingEvent {
                    n_star: e.n,
                    kappa_star: e.kappa,
                    touch_index: e.index,
                })
                .collect(),
        }
    }

    /// The complex-conjugate branch: rows mirrored across the real axis,
    /// events shared. Valid because the determinants and the collocation
    /// misfit are conjugation-symmetric in kappa.
    pub fn mirrored(&self, branch: String) -> Record {
        let mut out = self.clone();
        out.meta.branch = branch;
        for row in &mut out.rows {
            if row[2] != 0.0 {
                row[2] = -row[2];
            }
        }
        out
    }
}

/// Per-run event log: every axis touch of every branch, the Dirichlet
/// tones located by a scan, and a marker for each branch whose solve
/// failed (its data file is then absent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub run: String,
    pub version: String,
    pub entries: Vec<SidecarEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SidecarEntry {
    Touch {
        branch: String,
        index: usize,
        n: Real,
        kappa: Real,
    },
    Dirichlet {
        kappa: Real,
        misfit: Real,
    },
    Failure {
        branch: String,
        message: String,
    },
}

impl Sidecar {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::config(format!("sidecar serialization: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Sidecar, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Record {
            path: path.display().to_string(),
            line: 0,
            what: e.to_string(),
        })
    }
}
