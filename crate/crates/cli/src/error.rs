use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag or config value; exit code 2.
    #[error("usage: {0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{module} failed ({params}): {message}")]
    Runtime {
        module: &'static str,
        params: String,
        message: String,
    },
    #[error("{module} produced a non-finite value ({params})")]
    NonFinite { module: &'static str, params: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Io { .. } | CliError::Runtime { .. } | CliError::NonFinite { .. } => 1,
        }
    }

    pub fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn runtime(module: &'static str, params: &str, e: impl std::fmt::Display) -> Self {
        CliError::Runtime {
            module,
            params: params.to_string(),
            message: e.to_string(),
        }
    }
}
