//! Library half of the batch CLI: configuration schema, command
//! implementations, and the error-to-exit-code mapping. The `doublewell`
//! binary is a thin wrapper around these.

pub mod commands;
pub mod config;

/// Errors mapped onto exit codes: config 2, solver 3, I/O 4.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(doublewell::Error),
    Io(std::io::Error),
}

impl From<doublewell::Error> for CliError {
    fn from(e: doublewell::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Solver(_) => "solver",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Solver(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}
