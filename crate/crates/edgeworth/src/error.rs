//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error enum.
///
/// Validation failures carry a human-readable message that names the
/// offending field or entry, so scenario files can be fixed from the
/// message alone.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two objects that must agree in shape do not.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },

    /// A holding sits at or below the positivity floor where strictly
    /// interior quantities are required (gradients diverge there).
    #[error("boundary violation: {0}")]
    Boundary(String),

    /// A weight matrix is not symmetric, has a nonzero diagonal, or has
    /// negative entries.
    #[error("invalid network: {0}")]
    Network(String),

    /// A probability vector has negative entries or does not sum to one.
    #[error("invalid probability vector: {0}")]
    Probability(String),

    /// A scalar argument lies outside its admissible range.
    #[error("range error: {0}")]
    Range(String),

    /// An agent or good index is out of bounds.
    #[error("index error: {0}")]
    Index(String),

    /// A scenario or data file failed schema validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// A file could not be read or parsed at all.
    #[error("parse error: {0}")]
    Parse(String),

    /// The step-size controller diverged or a run could not proceed.
    #[error("integration error: {0}")]
    Integration(String),

    /// Reading or writing an artifact file failed.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
