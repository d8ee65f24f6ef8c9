use thiserror::Error;
use tipfold_core::{ConfigError, Error as CoreError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("only {succeeded} of {total} sweep points succeeded")]
    Degraded { succeeded: usize, total: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Config(_) | CoreError::KindMismatch { .. } | CoreError::Domain(_) => 2,
                CoreError::MaxEventsExceeded { .. }
                | CoreError::NoTipWithinBudget { .. }
                | CoreError::StepFloorReached { .. } => 3,
                CoreError::NewtonDiverged { .. } | CoreError::Unphysical { .. } | CoreError::ContinuationDiverged(_) => 4,
            },
            CliError::Degraded { .. } => 5,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}
