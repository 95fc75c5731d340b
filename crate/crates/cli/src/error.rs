use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CALIBRATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// One offending config field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "`{}`: {}", self.field, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config:{}", fmt_fields(.0))]
    Config(Vec<FieldError>),

    #[error("{0}")]
    Calibration(privsprt_core::Error),

    #[error("io error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Core(privsprt_core::Error),
}

fn fmt_fields(fields: &[FieldError]) -> String {
    fields.iter().map(|f| format!("\n  {f}")).collect()
}

impl CliError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config(vec![FieldError {
            field: field.into(),
            reason: reason.into(),
        }])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Calibration(_) => EXIT_CALIBRATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(_) => EXIT_FAILURE,
        }
    }
}

impl From<privsprt_core::Error> for CliError {
    fn from(e: privsprt_core::Error) -> Self {
        match e {
            privsprt_core::Error::InvalidParameter { name, reason } => CliError::field(name, reason),
            e @ privsprt_core::Error::Calibration { .. } => CliError::Calibration(e),
            e => CliError::Core(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
