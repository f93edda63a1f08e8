//! CLI failures and their exit codes.

/// Exit code when every requested threshold passes.
pub const EXIT_PASS: u8 = 0;
/// Exit code when a computation finished but a threshold failed.
pub const EXIT_THRESHOLD: u8 = 1;
/// Exit code for invalid input or configuration.
pub const EXIT_INVALID: u8 = 2;
/// Exit code for a numerical or I/O failure during the run.
pub const EXIT_COMPUTE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("computation failed: {0}")]
    Compute(cfslab::Error),
    #[error("output failed: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Compute(_) | CliError::Output(_) => EXIT_COMPUTE,
        }
    }
}

impl From<cfslab::Error> for CliError {
    fn from(e: cfslab::Error) -> Self {
        match e {
            cfslab::Error::InvalidParams(m) => CliError::Invalid(m),
            other => CliError::Compute(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
