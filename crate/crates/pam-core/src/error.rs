use thiserror::Error;

/// Crate-wide error type.
///
/// `InvalidInput` signals a caller mistake (bad parameter, wrong regime);
/// `Numerical` signals that a guard tripped during an otherwise valid
/// computation (non-integrable configuration, quadrature budget exhausted,
/// shooting bracket lost). CLI layers map the two to different exit codes.
#[derive(Debug, Error)]
pub enum PamError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical guard: {0}")]
    Numerical(String),
}

impl PamError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        PamError::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        PamError::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, PamError>;
