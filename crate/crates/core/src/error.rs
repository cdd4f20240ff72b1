use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CasimirError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("factorization failed at xi = {xi:e} rad/s, m = {m}: {reason}")]
    Factorization { xi: f64, m: i64, reason: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("Matsubara sum did not converge after {terms} terms")]
    MatsubaraTail { terms: usize },

    #[error("finite-difference step breakdown: estimated relative error {est:e} exceeds {limit:e}")]
    StepSize { est: f64, limit: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("provenance mismatch: {0}")]
    Provenance(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CasimirError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(CasimirError::Domain(msg.into()))
}
