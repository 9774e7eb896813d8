//! Error type shared by every analysis module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a structural precondition (non-monotone timestamps,
    /// empty input, malformed record, out-of-domain parameter).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A sampling interval contained no tracking fix.
    #[error("no tracking fix covers interval {interval}")]
    MissingData { interval: usize },

    /// The series is too short for the requested detrending order.
    #[error("series of length {len} too short for detrending order {order}")]
    InsufficientLength { len: usize, order: usize },

    /// A block size is incompatible with the series or detrending order.
    #[error("invalid scale n={scale}: {reason}")]
    InvalidScale { scale: usize, reason: String },

    /// Fewer usable points than the operation requires.
    #[error("{needed} points required, {available} available")]
    InsufficientPoints { needed: usize, available: usize },

    /// Every fluctuation value is zero; no scaling information present.
    #[error("fluctuation curve is identically zero")]
    DegenerateCurve,

    /// Zero standard error with a zero effect; the test statistic is undefined.
    #[error("zero standard error and zero effect: test statistic undefined")]
    NoVariance,

    /// ARFIMA parameters violate stationarity or invertibility.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Too few Monte-Carlo replicates for a distribution summary.
    #[error("{got} replicates given, at least {needed} required")]
    InsufficientReplicates { needed: usize, got: usize },

    /// No events of the requested state.
    #[error("no events to histogram")]
    EmptyHistogram,

    /// Too few histogram bins for a distribution fit.
    #[error("{needed} bins required, {available} available")]
    InsufficientBins { needed: usize, available: usize },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
