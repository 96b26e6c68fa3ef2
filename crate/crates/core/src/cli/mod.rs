//! Configuration ingestion, orchestration and CSV output for the
//! `thinshell` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, RunConfig, SCHEMA_VERSION};
pub use run::{run, Outcome};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("{0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 1 for anything wrong with the input, 2 for a numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}
