use crate::fourier::Arity;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("arity mismatch: expected {expected:?}, got {got:?}")]
    Arity { expected: Arity, got: Arity },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid overflow: {0}")]
    GridOverflow(String),
    #[error("non-integer wavenumber: {0}")]
    NonIntegerWavenumber(String),
    #[error("not positive: {0}")]
    NotPositive(String),
    #[error("zero stress: the Reynolds stress vanishes identically")]
    ZeroStress,
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("pulse overlap: {0}")]
    PulseOverlap(String),
    #[error("lambda cap exceeded: {0}")]
    CapExceeded(String),
    #[error("divergence: test field is not divergence-free ({0:e})")]
    NotDivergenceFree(f64),
    #[error("integrity: {0}")]
    Integrity(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
