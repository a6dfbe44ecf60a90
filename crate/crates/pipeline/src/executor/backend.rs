use std::fmt;

use mutval_core::ExecutionLimits;
use serde::{Deserialize, Serialize};

/// One unit of work for a runner: a candidate program plus one test.
#[derive(Debug, Clone)]
pub struct Job {
    pub code: String,
    pub test: String,
    pub limits: ExecutionLimits,
    /// Which timing repetition this is; 0 for correctness runs.
    pub repetition: u32,
}

/// How a run ended, as reported by the backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitClass {
    Completed,
    AssertionFailed,
    TimedOut,
    /// Any other abnormal termination, including load errors.
    Crashed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawOutcome {
    pub class: ExitClass,
    /// Time spent in the test body, as measured by the backend.
    pub wall_time_ms: f64,
    pub diagnostic: String,
}

impl RawOutcome {
    pub fn new(class: ExitClass, wall_time_ms: f64) -> Self {
        Self {
            class,
            wall_time_ms,
            diagnostic: String::new(),
        }
    }
}

/// The runner itself could not do its job (spawn failure, broken protocol,
/// crashed transport). Distinct from a candidate failing its test, and
/// worth retrying.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfraError(pub String);

impl fmt::Display for InfraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "runner infrastructure failure: {}", self.0)
    }
}

impl std::error::Error for InfraError {}

/// Something that can execute a [`Job`] in isolation.
///
/// Implementations must return within `time_limit_ms` plus the grace
/// period; the supervisor abandons them otherwise.
pub trait RunnerBackend: Send + Sync {
    fn run(&self, job: &Job) -> Result<RawOutcome, InfraError>;
}

/// Adapts a closure into a backend.
pub struct FnBackend<F>(pub F);

impl<F> RunnerBackend for FnBackend<F>
where
    F: Fn(&Job) -> Result<RawOutcome, InfraError> + Send + Sync,
{
    fn run(&self, job: &Job) -> Result<RawOutcome, InfraError> {
        (self.0)(job)
    }
}
