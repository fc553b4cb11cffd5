//! Library half of the command-line tool: configuration, report types,
//! and the stage-by-stage pipeline. The binary is a thin argument parser
//! over these.

pub mod config;
pub mod pipeline;
pub mod reports;

/// CLI failures carry the exit code contract:
/// 0 success, 2 config error, 3 data error, 4 runtime failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    pub fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    pub fn data(msg: String) -> Self {
        CliError::Data(msg)
    }

    pub fn runtime(msg: String) -> Self {
        CliError::Runtime(msg)
    }

    pub fn config_from(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn data_from(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }

    pub fn runtime_from(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
