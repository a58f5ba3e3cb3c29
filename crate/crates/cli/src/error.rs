use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema violation or otherwise unusable configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] sns_core::Error),
    #[error("{0}")]
    Run(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
