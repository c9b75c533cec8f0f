use std::path::Path;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Numeric(#[from] spinswap::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),

    /// A run finished but a requested check did not hold.
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Check(_) => 3,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}
