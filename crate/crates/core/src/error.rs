use thiserror::Error;

use crate::estimate::SeriesError;

pub type Result<T, E = SirdError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SirdError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("control input must be a finite nonnegative number, got {0}")]
    NegativeControl(f64),

    #[error("uncertainty draw out of bounds: {0}")]
    DrawOutOfBounds(String),

    #[error("day range is reversed: k = {k} < k0 = {k0}")]
    ReversedDayRange { k: usize, k0: usize },

    #[error("reproduction ratio is singular: {0}")]
    Singularity(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("gain {gain} outside the admissible range [{lo}, {hi}]")]
    GainOutOfRange { gain: f64, lo: f64, hi: f64 },

    #[error("horizon {horizon} exceeds the susceptible validity window of {window} days")]
    WindowExceeded { horizon: usize, window: u64 },

    #[error("no closed form in this region: discriminant {0} is negative")]
    OutOfBranch(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("estimation impossible: no day with nonzero confirmed cases")]
    NoUsableDays,

    #[error(transparent)]
    Series(#[from] SeriesError),
}
