use thiserror::Error;

/// Errors raised by the library. Certificate refutations are not errors; they
/// are reported through [`crate::certify::CertReport`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eig:.6e})")]
    NotPsd { min_eig: f64 },

    #[error("factor width {width} is smaller than the numerical rank {rank}")]
    BadWidth { width: usize, rank: usize },

    #[error("direction leaves the subspace V^T W V = 0 (residual {residual:.3e})")]
    SubspaceViolation { residual: f64 },

    #[error("eigenvalue condition violated: sigma_{i} = {sigma_i:.6e}, sigma_{j} = {sigma_j:.6e}")]
    EigenvalueConditionViolated {
        i: usize,
        j: usize,
        sigma_i: f64,
        sigma_j: f64,
    },

    #[error("constraint matrix is infeasible (minimum eigenvalue {min_eig:.6e})")]
    NotFeasible { min_eig: f64 },

    #[error("not a first-order point: {0}")]
    NotFirstOrder(String),

    #[error("iteration stalled: {0}")]
    Stalled(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
