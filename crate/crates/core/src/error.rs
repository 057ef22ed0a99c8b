use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("approximation factor below admissible threshold: c = {c} must exceed tau = {tau}")]
    BelowThreshold { c: f64, tau: f64 },

    #[error("false-positive probability must lie in (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),

    #[error("dataset too small for automatic k (formula gives {value:.4}); supply k manually")]
    DatasetTooSmall { value: f64 },

    #[error("3^{k} cells exceeds the cell budget of {budget}")]
    CellBudgetExceeded { k: usize, budget: u64 },

    #[error("hash value {0} is outside the representable range (|value| <= 2^62)")]
    HashOverflow(f64),

    #[error("hash keys have different lengths ({0} vs {1})")]
    KeyLengthMismatch(usize, usize),

    #[error("not an index file")]
    NotIndexFile,

    #[error("unsupported index format version {found} (this build reads version {expected})")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("index checksum mismatch: file is truncated or corrupted")]
    Checksum,

    #[error("corrupt index file: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }
}
