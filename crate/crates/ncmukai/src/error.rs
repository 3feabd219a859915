use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    /// Schema or validation failure; `pointer` is a JSON pointer into the config.
    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },
    #[error("instance file {path}: {message}")]
    Instance { path: String, message: String },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
    #[error(transparent)]
    Core(#[from] ncmukai_core::Error),
}

impl AppError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config { .. } | AppError::Instance { .. } => 2,
            _ => 1,
        }
    }
}
