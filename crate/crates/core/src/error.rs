use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no configuration has total Sz = {0}")]
    EmptySector(String),

    #[error("site index {index} out of range for {n_sites} sites")]
    IndexOutOfRange { index: usize, n_sites: usize },

    #[error("unsupported spin length {0} for this operation")]
    UnsupportedSpin(String),

    #[error("invalid site specification: {0}")]
    InvalidSites(String),

    #[error("model/basis mismatch: {0}")]
    SpecMismatch(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("Lanczos did not converge in {max_iter} iterations (residual {residual:e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    #[error("operator dimension {dim} is smaller than the {requested} requested Ritz pairs")]
    DimensionTooSmall { dim: usize, requested: usize },

    #[error("dense diagonalization refused: dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("finite-difference step {step:e} below the minimum {min:e}")]
    StepTooSmall { step: f64, min: f64 },

    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },

    #[error("state vectors live in different bases ({0} vs {1} entries)")]
    BasisMismatch(usize, usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("fidelity {0} is not positive")]
    NonPositiveFidelity(f64),

    #[error("negative eigenvalue {0:e} in spectrum")]
    NegativeEigenvalue(f64),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("ground-state sector changed between {0} and {1}")]
    SectorChange(f64, f64),

    #[error("column {column} has its maximum at the grid endpoint {param}")]
    NoInteriorPeak { column: String, param: f64 },

    #[error("invalid sweep input: {0}")]
    InvalidSweep(String),

    #[error("I/O: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
