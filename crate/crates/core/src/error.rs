use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("calendar has no entry for submitted problem ids: {}", .0.join(", "))]
    MissingCalendarEntries(Vec<String>),

    #[error("timestamp {timestamp} precedes course start {course_start}")]
    BeforeCourseStart { timestamp: i64, course_start: i64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("missing artifact {}: run `{stage}` first", path.display())]
    MissingArtifact { path: PathBuf, stage: &'static str },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::MissingArtifact { .. } => 2,
            Error::InsufficientData(_) | Error::DegenerateLabels(_) => 4,
            _ => 3,
        }
    }

    /// True for the typed "cannot model this problem" outcomes.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::InsufficientData(_) | Error::DegenerateLabels(_))
    }
}
