use casimir_core::CasimirError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] CasimirError),
    #[error("{0}")]
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numeric(e) => match e {
                CasimirError::Domain(_) | CasimirError::Config(_) => "config",
                CasimirError::Quadrature(_) => "quadrature",
                CasimirError::Factorization { .. } => "factorization",
                CasimirError::NonFinite(_) => "non_finite",
                CasimirError::MatsubaraTail { .. } => "matsubara_tail",
                CasimirError::StepSize { .. } => "step_size",
                CasimirError::Fit(_) => "fit",
                CasimirError::Provenance(_) => "provenance",
            },
        }
    }

    /// 2 for bad input, 1 for failures during the computation.
    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "config" => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let report = ErrorReport { error: ErrorBody { kind: self.kind(), message: self.to_string() } };
        serde_json::to_string(&report).unwrap_or_else(|_| format!("{{\"error\":{{\"kind\":\"{}\"}}}}", self.kind()))
    }
}
