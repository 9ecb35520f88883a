//! Building blocks of the `fractance` executable: circuit presets, CSV/JSON
//! input and output, and the simulate-then-estimate pipeline.

pub mod io;
pub mod pipeline;
pub mod presets;

use thiserror::Error;

/// Failure classes of the executable; each maps to its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Fit(_) => 4,
            CliError::Output(_) => 1,
        }
    }

    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn simulation(e: impl std::fmt::Display) -> Self {
        CliError::Simulation(e.to_string())
    }

    pub fn fit(e: impl std::fmt::Display) -> Self {
        CliError::Fit(e.to_string())
    }

    pub fn output(e: impl std::fmt::Display) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
