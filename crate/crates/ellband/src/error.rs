use std::path::{Path, PathBuf};

use ellband_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Data {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("table line {line}: {msg}")]
    TableFormat { line: usize, msg: String },
    #[error("{path}: {msg}")]
    TableFile { path: PathBuf, msg: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::TableFormat { line, msg } => CliError::TableFile {
                path: path.to_path_buf(),
                msg: format!("line {line}: {msg}"),
            },
            other => other,
        }
    }

    /// Process exit code: 2 usage, 3 unsupported, 4 unreadable input,
    /// 5 transform domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. }
            | CliError::Data { .. }
            | CliError::TableFormat { .. }
            | CliError::TableFile { .. } => 4,
            CliError::Core(e) => match e {
                CoreError::TransformDomain { .. } => 5,
                CoreError::UnsupportedAlpha(_)
                | CoreError::Unsupported(_)
                | CoreError::OutOfRange { .. }
                | CoreError::TooLarge { .. }
                | CoreError::EmptyTable
                | CoreError::NonConvergence(_) => 3,
                CoreError::Degenerate(_) => 4,
                _ => 2,
            },
        }
    }
}
