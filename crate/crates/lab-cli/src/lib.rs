//! Scenario runner: configuration, subcommands, certificates and plots.

pub mod commands;
pub mod config;
pub mod plots;
pub mod scenario;
pub mod verify;

use ricci_lab::LabError;

/// Failures of a run, mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration (exit 2).
    Config(String),
    /// A kernel failed outside any certificate (exit 3).
    Numerical(LabError),
    /// Output could not be written (exit 3).
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Numerical(e) => write!(f, "numerical failure: {e}"),
            Self::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        Self::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) | Self::Io(_) => 3,
        }
    }
}

/// Fixed-width scientific formatting used in every CSV.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}
