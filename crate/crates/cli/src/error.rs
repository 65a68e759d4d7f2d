use mdir_core::permute::PermError;
use mdir_core::simstudy::SimError;
use mdir_core::{LogrankError, SurvError};
use thiserror::Error;

/// Errors surfaced by the CLI. Each maps to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

impl From<SurvError> for CliError {
    fn from(e: SurvError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<LogrankError> for CliError {
    fn from(e: LogrankError) -> Self {
        match e {
            LogrankError::NoEvents => CliError::Data(e.to_string()),
            LogrankError::InvalidAlpha { .. } => CliError::Usage(e.to_string()),
            LogrankError::Numerics(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PermError> for CliError {
    fn from(e: PermError) -> Self {
        match e {
            PermError::Logrank(inner) => inner.into(),
            PermError::NoPermutations => CliError::Usage(e.to_string()),
            PermError::DegenerateStatistic { .. } | PermError::TooManyAssignments { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::NegativeHazard { .. } => CliError::Usage(e.to_string()),
            SimError::Surv(inner) => inner.into(),
            SimError::Logrank(inner) => inner.into(),
            SimError::Numerics(_) => CliError::Numeric(e.to_string()),
            SimError::Csv(_) | SimError::Io(_) => CliError::Output(e.to_string()),
        }
    }
}
