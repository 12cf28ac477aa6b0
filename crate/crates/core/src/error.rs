use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SftError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("grading error: {0}")]
    Grading(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("level error: {0}")]
    Level(String),
    #[error("filtration error: {0}")]
    Filtration(String),
    #[error("soundness error: {0}")]
    Soundness(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, SftError>;
