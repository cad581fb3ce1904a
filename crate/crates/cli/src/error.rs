use thiserror::Error;

/// Failures surfaced by the command line, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: line {line}: {message}")]
    Line { path: String, line: u64, message: String },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Compute(rankset::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Line { .. } | CliError::Data(_) | CliError::Io(_) => 2,
            CliError::Compute(_) => 3,
        }
    }

    /// Wraps a library error raised while validating inputs.
    pub fn data(e: rankset::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<rankset::Error> for CliError {
    fn from(e: rankset::Error) -> Self {
        use rankset::Error as E;
        match e {
            E::CapExceeded { .. } | E::NoConvergence(_) | E::Infeasible => CliError::Compute(e),
            E::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
