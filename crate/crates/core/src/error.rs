use std::fmt;

use thiserror::Error;

/// A configuration that violates one of the structural invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Name of the offending field.
    pub field: &'static str,
    /// The violated invariant, e.g. `"K > 0"`.
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("operation requires kind {expected}, got {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("more than {cap} switching events before t = {t:.6}")]
    MaxEventsExceeded { cap: usize, t: f64 },
    #[error("no tipping within t <= {t_max}")]
    NoTipWithinBudget { t_max: f64 },
    #[error("Newton iteration failed at mu = {mu} (residual {residual:.3e})")]
    NewtonDiverged { mu: f64, residual: f64 },
    #[error("orbit at mu = {mu} violates the sign conditions")]
    Unphysical { mu: f64 },
    #[error("continuation failed: {0}")]
    ContinuationDiverged(String),
    #[error("step size fell below {h_min:e} at t = {t}")]
    StepFloorReached { t: f64, h_min: f64 },
    #[error("outside domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
