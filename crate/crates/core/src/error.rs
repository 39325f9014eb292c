use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("point not in the domain of the model: {0}")]
    NotInDomain(String),
    #[error("address inadmissible at depth {depth}: {reason}")]
    AddressInadmissible { depth: usize, reason: String },
    #[error("conformal accuracy not reached: achieved {achieved:e}, requested {requested:e}")]
    AccuracyNotReached { achieved: f64, requested: f64 },
    #[error("conformal accuracy insufficient: {0}")]
    AccuracyInsufficient(String),
    #[error("normalization infeasible: {0}")]
    NormalizationInfeasible(String),
    #[error("geodesic intersection not found: {0}")]
    GeodesicNotFound(String),
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("disjoint-type violation: {0}")]
    DisjointTypeViolation(String),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("value not representable in double precision: {0}")]
    NotRepresentable(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
