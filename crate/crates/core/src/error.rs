use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("TSP instance has {nodes} nodes; the exact solver accepts at most {max}, use the nearest-neighbor heuristic instead")]
    TooLarge { nodes: usize, max: usize },

    #[error("TSP instance is infeasible: {0}")]
    Infeasible(String),

    #[error("waypoint ({x:.3}, {y:.3}) is off the free-space grid")]
    OffGrid { x: f64, y: f64 },

    #[error("rover positions coincide; heading is undefined")]
    DegenerateBaseline,

    #[error("mission failed: leg {leg} timed out after {elapsed:.1} s")]
    LegTimeout { leg: usize, elapsed: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("point cloud is in the {found} frame, expected {expected}")]
    Frame {
        expected: &'static str,
        found: &'static str,
    },

    #[error("no correspondences within {gate:.3} m")]
    NoOverlap { gate: f64 },

    #[error("empty point cloud")]
    EmptyInput,

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input (configuration or files),
    /// as opposed to failures while running a stage.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Parse { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
