//! Command-line front end for the Hilfer problem solver.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure
//! (including a Picard run that does not converge), 3 certificate failure.

pub mod app;
pub mod expr;
pub mod problem;
pub mod table;

use thiserror::Error;

pub use app::run;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input: {0}")]
    Input(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
}

impl From<hilfer_core::Error> for CliError {
    fn from(e: hilfer_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Certificate(_) => 3,
        }
    }
}
