use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("all {starts} optimisation starts diverged")]
    AllStartsDiverged { starts: usize },

    #[error("closed form unusable: {0}")]
    ClosedFormInvalid(String),

    #[error("closed-form projection requires an origin-centred basis (sigma = 0, center = 0)")]
    UnsupportedBasis,

    #[error("basis under-resolves the state: |c_(N-1)|^2 = {tail:e}")]
    UnderResolved { tail: f64 },

    #[error("eigenvectors are not orthonormal (max defect {defect:e})")]
    NotOrthonormal { defect: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
