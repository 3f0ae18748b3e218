use thiserror::Error;

/// Errors surfaced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Function argument outside the supported domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameter vector malformed for the requested boundary family.
    #[error("parameter error: {0}")]
    Params(String),

    /// Curve or source layout fails the validity predicate.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// The discrete boundary operator is numerically singular.
    #[error("solver error: {0}")]
    Singular(String),

    /// Rejection rate of prior draws too high to build a surrogate.
    #[error("prior mismatch: {0}")]
    PriorMismatch(String),

    /// Inconsistent run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed data file.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
