use thiserror::Error;

use crate::spec::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({u}, {v}) is outside the unit square")]
    PointOutOfRange { u: f64, v: f64 },

    #[error("invalid rectangle [{u1},{u2}]x[{v1},{v2}]: need 0 <= u1 < u2 <= 1 and 0 <= v1 < v2 <= 1")]
    InvalidRectangle { u1: f64, u2: f64, v1: f64, v2: f64 },

    /// A constructor rejected its parameters, e.g. `mo: alpha must be in (0,1)`.
    #[error("{constructor}: {reason}")]
    InvalidParameter {
        constructor: &'static str,
        reason: String,
    },

    #[error("invalid mixture: {0}")]
    InvalidMix(String),

    #[error("invalid resolution {n}: {reason}")]
    InvalidResolution { n: usize, reason: &'static str },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("cell budget exhausted: {used} cells evaluated, budget is {budget}")]
    BudgetExceeded { used: usize, budget: usize },

    #[error("candidate {index} is not {expected}")]
    InvalidCandidate { index: usize, expected: &'static str },

    #[error("malformed grid: {0}")]
    MalformedGrid(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}
