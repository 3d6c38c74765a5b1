use thiserror::Error;

/// Process exit status. The numeric values are a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Mismatch = 1,
    Usage = 2,
    Numeric = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] pseudohyp_core::Error),
    #[error("serialization error: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Core(e) if e.is_numeric() => Exit::Numeric,
            CliError::Serialize(_) => Exit::Numeric,
            _ => Exit::Usage,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
