use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve {index}: {reason}")]
    InvalidCurve { index: usize, reason: String },

    #[error("shape has {} violation(s): {}", .0.len(), join_violations(.0))]
    InvalidShape(Vec<Violation>),

    #[error("point {re}{im:+}i lies within {tolerance:e} of the boundary")]
    AmbiguousBoundary { re: f64, im: f64, tolerance: f64 },

    #[error("invalid resolution {0}: nodes per curve must be even and at least 16")]
    InvalidResolution(usize),

    #[error("equilibrium system is singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("equilibrium density {value:e} on curve {curve} is negative beyond tolerance")]
    NegativeDensity { curve: usize, value: f64 },

    #[error("boundary residual {residual:e} exceeds tolerance {tolerance:e}; increase --nodes")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("point at distance {distance:e} is inside the boundary band {band:e}")]
    TooCloseToBoundary { distance: f64, band: f64 },

    #[error("{n} roots cannot cover {curves} curves")]
    TooFewRoots { n: usize, curves: usize },

    #[error("coefficient expansion refused for degree parameter n = {0} (limit 20)")]
    DegreeTooLarge(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("classification dimensions {found:?} do not match grid {expected:?}")]
    GridMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("mask is empty")]
    EmptyMask,

    #[error("no (delta, n) pair reached epsilon = {epsilon}")]
    ExhaustedScan { epsilon: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code: 1 invalid input, 2 numerical failure, 3 I/O or parse.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidCurve { .. } | Error::InvalidShape(_) | Error::Config(_) => 1,
            Error::InvalidGrid(_) | Error::GridMismatch { .. } | Error::TooFewRoots { .. } => 1,
            Error::Parse { .. } | Error::Io { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
