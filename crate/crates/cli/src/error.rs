//! CLI error type carrying the process exit code contract:
//! 2 parse, 3 validation, 4 non-convergence, 5 I/O.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Malformed input text: config file syntax, override syntax, bad CSV.
    Parse(String),
    /// Structurally fine input with an invalid value or unknown key.
    Validation(String),
    /// The simulated loop finished without converging (outputs are written).
    NonConvergence,
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::NonConvergence => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::NonConvergence => write!(f, "loop did not converge"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<photon_sim_core::Error> for CliError {
    fn from(e: photon_sim_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
