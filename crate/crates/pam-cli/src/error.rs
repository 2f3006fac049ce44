use std::fmt;

use pam_core::error::PamError;

/// Driver-level error, split by the exit code it maps to: configuration
/// problems exit with 2, tripped numerical guards with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Guard(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Guard(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Guard(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<PamError> for CliError {
    fn from(e: PamError) -> Self {
        match e {
            PamError::InvalidInput(m) => CliError::Config(m),
            PamError::Numerical(_) => CliError::Guard(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
