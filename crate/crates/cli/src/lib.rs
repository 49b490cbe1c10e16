//! Library half of the `gramcone` binary: argument handling, JSON documents
//! and the subcommands, kept here so the integration tests can drive them
//! without spawning processes.

pub mod commands;
pub mod config;
pub mod dto;
pub mod jsonfmt;

pub use commands::{run, RunOutcome, EXIT_DISAGREEMENT, EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK};
pub use config::{Cli, Command, Dims, Format, RunConfig, SeedRange};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Hypothesis(String),
    #[error(transparent)]
    Core(#[from] gramcone::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Io { .. } | Self::Parse { .. } => EXIT_INPUT,
            Self::Hypothesis(_) => EXIT_HYPOTHESIS,
            Self::Core(_) => EXIT_NUMERIC,
        }
    }
}
