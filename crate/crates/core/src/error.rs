use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the geometry, simulation and bound-checking routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("identity component present: trace = {trace:.3e}")]
    IdentityComponent { trace: f64 },

    #[error("antipodal/branch error: eigenvalue {eigenvalue} lies within {gap:.1e} of -1")]
    BranchCut { eigenvalue: Complex64, gap: f64 },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("infeasible within budget: best endpoint error {best_endpoint_error:.3e}")]
    Infeasible { best_endpoint_error: f64 },

    #[error("coefficient bound violated: |y| = {value} for {pauli} exceeds 1")]
    CoefficientBound { pauli: String, value: f64 },

    #[error("contract error: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
