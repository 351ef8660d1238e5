use gkp_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Config = 2,
    Numeric = 3,
    Verification = 4,
    Io = 5,
}

impl ExitKind {
    pub fn label(self) -> &'static str {
        match self {
            ExitKind::Config => "config",
            ExitKind::Numeric => "numeric",
            ExitKind::Verification => "verification",
            ExitKind::Io => "io",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn kind(&self) -> ExitKind {
        match self {
            CliError::Config(_) => ExitKind::Config,
            CliError::Verification(_) => ExitKind::Verification,
            CliError::Io { .. } => ExitKind::Io,
            CliError::Core(e) => match e {
                CoreError::InvalidDimension { .. }
                | CoreError::InvalidInput(_)
                | CoreError::Shape { .. }
                | CoreError::Resource(_) => ExitKind::Config,
                CoreError::Verification(_) => ExitKind::Verification,
                _ => ExitKind::Numeric,
            },
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
