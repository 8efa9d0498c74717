//! CLI error classes and their process exit codes.

use std::fmt;

/// Exit codes: 0 success, 2 configuration, 3 physics precondition, 4 I/O,
/// 1 for verification mismatches.
#[derive(Debug)]
pub enum CliError {
    /// Bad or missing configuration; the message names the field.
    Config(String),
    /// A simulation precondition failed at run time.
    Physics(dwva_core::Error),
    Io(String),
    /// An output file did not reproduce from its embedded configuration.
    VerifyMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyMismatch(_) => 1,
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(context: &str, err: std::io::Error) -> CliError {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Physics(err) => write!(f, "physics error: {err}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::VerifyMismatch(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dwva_core::Error> for CliError {
    fn from(err: dwva_core::Error) -> Self {
        CliError::Physics(err)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
