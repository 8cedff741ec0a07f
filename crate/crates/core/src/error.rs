use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point set is empty")]
    EmptyPointSet,

    #[error("point {index} has a non-finite coordinate at axis {axis}")]
    NonFiniteCoordinate { index: usize, axis: usize },

    #[error("observation {index} is not finite")]
    NonFiniteObservation { index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid k = {k} for {n} points (need 1 <= k <= n)")]
    InvalidK { k: usize, n: usize },

    #[error("radius must be finite and nonnegative, got {0}")]
    InvalidRadius(f64),

    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("probe set is empty")]
    EmptyProbes,

    #[error("true level set is empty on the grid (level above the field maximum)")]
    EmptyTruth,

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    #[error("unsupported manifold: {0}")]
    UnsupportedManifold(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
