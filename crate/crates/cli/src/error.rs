//! Command-level errors and their process exit codes.

use ergodikit::ErrorClass;

/// Exit codes: 0 success, 1 failed stationarity check, 2 validation,
/// 3 numerical, 4 IO.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ergodikit::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("stationarity residual {residual:e} exceeds 1e-8 (worst word {word:?})")]
    CheckFailed { residual: f64, word: Vec<usize> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Numerical => 3,
            },
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 4,
            CliError::CheckFailed { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn io_err(path: &std::path::Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn parse_err(path: &std::path::Path, detail: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}
