use std::process::ExitCode;

use thiserror::Error;

/// Failures mapped onto the process exit-code contract.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed config, problem file or input data.
    #[error("{0}")]
    Input(String),
    /// The requested quantity does not exist for these parameters.
    #[error("{0}")]
    NoSolution(String),
    /// Writing results failed.
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) => 2,
            CliError::NoSolution(_) => 3,
            CliError::Output(_) => 1,
        })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
