use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("solver aborted: {0}")]
    Aborted(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for configuration, validation and I/O problems, 2 for solver aborts,
    /// 3 for failed checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Aborted(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl From<relaxlab::Error> for CliError {
    /// Library errors raised while running a solver.
    fn from(e: relaxlab::Error) -> Self {
        match e {
            relaxlab::Error::Io(io) => CliError::Io(io),
            other => CliError::Aborted(other.to_string()),
        }
    }
}
