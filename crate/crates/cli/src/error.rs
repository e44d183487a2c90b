use serde::Serialize;
use thiserror::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// The spec could not be read or parsed.
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("spec has {} violation(s)", .0.len())]
    Validation(Vec<String>),
    #[error(transparent)]
    Core(#[from] sos_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// The machine-readable record printed on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
    pub violations: Vec<String>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Validation(_) => EXIT_VALIDATION,
            _ => EXIT_RUNTIME,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let (error, violations) = match self {
            CliError::Spec(_) => ("spec", Vec::new()),
            CliError::Validation(v) => ("validation", v.clone()),
            CliError::Core(sos_core::Error::Invariant(_)) => ("invariant", Vec::new()),
            _ => ("runtime", Vec::new()),
        };
        ErrorRecord { error, exit_code: self.exit_code(), message: self.to_string(), violations }
    }
}
