use nilprobe_core::Error as CoreError;
use thiserror::Error;

/// Every failure path of a run, each with one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema: {0}")]
    Schema(String),

    #[error("{0}")]
    UnsupportedBasis(String),

    #[error("budget exhausted: {0}")]
    Exhausted(String),

    #[error("internal invariant breach: {0}")]
    Internal(String),

    #[error("io: {0}")]
    Io(String),
}

pub mod exit {
    pub const OK: i32 = 0;
    /// A declared expectation did not hold.
    pub const EXPECTATION: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const UNSUPPORTED_BASIS: i32 = 3;
    pub const EXHAUSTED: i32 = 4;
    pub const INTERNAL: i32 = 5;
    pub const IO: i32 = 6;
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Schema(_) => exit::SCHEMA,
            CliError::UnsupportedBasis(_) => exit::UNSUPPORTED_BASIS,
            CliError::Exhausted(_) => exit::EXHAUSTED,
            CliError::Internal(_) => exit::INTERNAL,
            CliError::Io(_) => exit::IO,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "SCHEMA",
            CliError::UnsupportedBasis(_) => "UNSUPPORTED-BASIS",
            CliError::Exhausted(_) => "BUDGET-EXHAUSTED",
            CliError::Internal(_) => "INTERNAL",
            CliError::Io(_) => "IO",
        }
    }
}

/// Library errors are input problems, except a missing basis product.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::UnsupportedBasis { .. } => CliError::UnsupportedBasis(e.to_string()),
            other => CliError::Schema(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
