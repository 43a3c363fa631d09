//! CLI failure taxonomy: configuration problems exit with 2, everything
//! downstream (solver failures, i/o) with 1.

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid or inconsistent configuration; `key` is the dotted path.
    #[error("{key}: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Core(#[from] rarepde::Error),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> CliError {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// 2 for configuration errors, 1 for runtime failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
