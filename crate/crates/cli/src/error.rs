use thiserror::Error;

/// Errors surfaced by the command-line tool, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<certann::Error> for CliError {
    fn from(e: certann::Error) -> Self {
        use certann::Error::*;
        match e {
            InvalidParameter(_)
            | BelowThreshold { .. }
            | ProbabilityOutOfRange(_)
            | DatasetTooSmall { .. }
            | CellBudgetExceeded { .. } => CliError::Config(e.to_string()),
            DimensionMismatch { .. }
            | HashOverflow(_)
            | KeyLengthMismatch(..)
            | NotIndexFile
            | VersionMismatch { .. }
            | Checksum
            | Corrupt(_)
            | Io(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
