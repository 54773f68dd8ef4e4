use std::io;

use thiserror::Error;

use crate::lattice::LatticePoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-facing configuration (bad dimension, radius, flag value).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires a nonempty aggregate")]
    EmptyAggregate,

    #[error("walk left the coordinate box (|coord| < {limit}) at {point:?}")]
    OutOfBox { point: LatticePoint, limit: i32 },

    #[error("walk exceeded {limit} elementary steps (started at {start:?})")]
    StepLimit { start: LatticePoint, limit: u64 },

    #[error("exit kernel d={dim} r={radius} too large: {reason}")]
    KernelTooLarge { dim: usize, radius: u32, reason: String },

    #[error("coupling invariant violated: {0}")]
    CouplingViolation(String),

    #[error("eta={eta} exceeds the harmonic ratio min_y h_y(x)/h_y(0) = {ratio:.6} at start {start:?}")]
    EtaTooLarge { eta: f64, ratio: f64, start: LatticePoint },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { what: &'static str, iterations: u64, residual: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than a failed run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidArgument(_) | Error::Parse { .. } | Error::KernelTooLarge { .. }
        )
    }
}
