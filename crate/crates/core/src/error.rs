//! Error type shared across the crate.
//!
//! Every variant carries a stable machine-readable code string so that the
//! CLI (and the C bindings) can surface failures without parsing messages.

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("latitude out of range: {0} not in [-pi/2, pi/2]")]
    LatitudeOutOfRange(f64),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("empty source set")]
    EmptySource,

    #[error("neighbor count {k} out of range [1, {n}]")]
    KOutOfRange { k: usize, n: usize },

    #[error("Gram matrix is singular or near-singular (min/max eigenvalue ratio {ratio:.3e})")]
    SingularGram { ratio: f64 },

    #[error("mass imbalance: measure totals differ by {0:.3e}")]
    MassImbalance(f64),

    #[error("empty measure support")]
    EmptySupport,

    #[error("instance too large: {size} points exceeds cap {cap}")]
    InstanceTooLarge { size: usize, cap: usize },

    #[error("solver did not converge: {0}")]
    SolverNonconvergence(String),

    #[error("invalid lipschitz constant: {0} (must be > 0)")]
    InvalidLipschitz(f64),

    #[error("invalid alpha: {0} (must be in (0, 1))")]
    InvalidAlpha(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("csv parse error: {0}")]
    CsvParse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("degenerate density estimate: {0}")]
    DegenerateDensity(String),
}

impl Error {
    /// Stable error code for machine-readable output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::NonFinite(_) => "non-finite",
            Error::LatitudeOutOfRange(_) => "latitude-out-of-range",
            Error::InvalidMetric(_) => "invalid-metric",
            Error::EmptySource => "empty-source",
            Error::KOutOfRange { .. } => "k-out-of-range",
            Error::SingularGram { .. } => "singular-gram",
            Error::MassImbalance(_) => "mass-imbalance",
            Error::EmptySupport => "empty-support",
            Error::InstanceTooLarge { .. } => "instance-too-large",
            Error::SolverNonconvergence(_) => "solver-nonconvergence",
            Error::InvalidLipschitz(_) => "invalid-lipschitz",
            Error::InvalidAlpha(_) => "invalid-alpha",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::CsvParse(_) => "csv-parse",
            Error::Io(_) => "io",
            Error::DegenerateDensity(_) => "degenerate-density",
        }
    }
}
