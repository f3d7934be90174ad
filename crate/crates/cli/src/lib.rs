//! Experiment layer over the eigenvalue library: named figure presets,
//! a plain-text trajectory record format, a parallel runner, and a
//! verifier that replays structural properties against recorded data.

pub mod config;
pub mod presets;
pub mod record;
pub mod runner;
pub mod verify;

/// Everything user-facing funnels through this error: configuration
/// problems keep their own text, solver errors carry through from the
/// library, and file problems keep the path that caused them.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] itraj_core::CoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {what}")]
    Record {
        path: String,
        line: usize,
        what: String,
    },
}

impl CliError {
    pub fn config(what: impl Into<String>) -> Self {
        CliError::Config(what.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
