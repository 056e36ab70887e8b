//! Process exit codes and the error type that carries them.

use std::fmt;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// Unreadable or malformed input, unknown ids, missing required settings.
    Input = 1,
    /// Inputs are fine but the requested configuration cannot be satisfied.
    Infeasible = 2,
    /// Every network request failed after retries.
    Network = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub trait ResultExt<T> {
    fn or_exit(self, kind: ExitKind) -> CliResult<T>;

    fn input(self) -> CliResult<T>
    where
        Self: Sized,
    {
        self.or_exit(ExitKind::Input)
    }
}

impl<T, E: Into<anyhow::Error>> ResultExt<T> for Result<T, E> {
    fn or_exit(self, kind: ExitKind) -> CliResult<T> {
        self.map_err(|e| CliError { kind, error: e.into() })
    }
}

pub fn input_error(msg: impl fmt::Display) -> CliError {
    CliError { kind: ExitKind::Input, error: anyhow::anyhow!("{msg}") }
}
