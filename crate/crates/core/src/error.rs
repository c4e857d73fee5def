//! Crate-wide error type.

use thiserror::Error;

/// Unified error for solver construction, integration, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Inadmissible material parameters (joined list of violated relations).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Inadmissible initial-data request (scale, base angle, grid, …).
    #[error("invalid initial data: {0}")]
    InvalidData(String),

    /// Configuration / input-file problem; message names the offending key.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Numerical fault inside a solver (NaN, fold-over, monotonicity loss),
    /// with the location where it was detected.
    #[error("solver fault: {0}")]
    Solver(String),

    /// The fixed-point iteration failed to converge after the permitted
    /// number of slab subdivisions.
    #[error("fixed-point iteration did not converge: {0}")]
    NoConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
