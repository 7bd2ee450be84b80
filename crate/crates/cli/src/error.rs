// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::process::ExitCode;

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
    Parse(String),
    Config(String),
    Guard(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Io(_) => 1,
            Self::Usage(_) => 2,
            Self::Parse(_) => 3,
            Self::Config(_) => 4,
            Self::Guard(_) => 5,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(m) | Self::Usage(m) | Self::Parse(m) | Self::Config(m) | Self::Guard(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<slopeop::Error> for CliError {
    fn from(e: slopeop::Error) -> Self {
        match e {
            slopeop::Error::InvalidInput(_) | slopeop::Error::Config(_) => {
                Self::Config(e.to_string())
            }
            slopeop::Error::Guard(_) | slopeop::Error::Infeasible(_) => Self::Guard(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
