use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad parameters, infeasible grids or an unusable output path.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("runtime failure: {0}")]
    Core(#[from] mimome_core::Error),
    #[error("runtime failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("runtime failure: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
