//! Command implementations behind the `dslab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod evolve;
pub mod export;
pub mod io;
pub mod plot;
pub mod scenario;
pub mod surface;
pub mod verify;

pub use config::ScenarioConfig;

/// Failure of a command, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or missing configuration or input: exit status 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// Computation or output failure: exit status 1.
    #[error(transparent)]
    Core(#[from] dslab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
