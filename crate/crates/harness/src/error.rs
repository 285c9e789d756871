use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid input {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } | HarnessError::Input { .. } => 1,
            HarnessError::Verification(_) => 2,
            HarnessError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl AsRef<Path>) -> impl FnOnce(io::Error) -> Self {
        let path = path.as_ref().to_path_buf();
        move |source| HarnessError::Io { path, source }
    }

    pub(crate) fn input(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        HarnessError::Input { path: path.as_ref().to_path_buf(), message: message.into() }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
