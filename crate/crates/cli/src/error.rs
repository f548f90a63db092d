use thiserror::Error;

use tailmean_core::Error as CoreError;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InfeasibleCutoff { .. } | CoreError::NoSolution { .. } => {
                CliError::Infeasible(format!(
                    "{err}; raise the truncation level with --kappa-const or --kappa"
                ))
            }
            CoreError::NonFinite { .. } => CliError::Data(err.to_string()),
            CoreError::InvalidParameter(_) | CoreError::InvalidCovariance(_) => {
                CliError::Config(err.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
