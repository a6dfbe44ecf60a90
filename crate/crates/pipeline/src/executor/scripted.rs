//! Table-driven backend for tests and offline fixture runs.
//!
//! Outcomes are looked up by substring match on the job's code and test
//! text; the first matching rule wins. Nothing is executed.
//!
//! ```json
//! {
//!   "default": { "status": "fail", "wall_ms": [1] },
//!   "rules": [
//!     { "code_contains": "sorted(", "test_contains": "f([3,1])", "status": "pass", "wall_ms": [10, 11, 10] }
//!   ]
//! }
//! ```

use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use mutval_core::ExecutionStatus;
use serde::{Deserialize, Serialize};

use super::backend::{ExitClass, InfraError, Job, RawOutcome, RunnerBackend};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedOutcome {
    pub status: ExecutionStatus,
    /// Reported wall time per repetition, cycled when shorter.
    #[serde(default = "default_wall")]
    pub wall_ms: Vec<f64>,
    /// Actually sleep for the reported time instead of only reporting it.
    #[serde(default)]
    pub sleep: bool,
    /// Fail with an infrastructure error instead of producing an outcome.
    #[serde(default)]
    pub transport_error: bool,
}

fn default_wall() -> Vec<f64> {
    vec![1.0]
}

impl ScriptedOutcome {
    pub fn new(status: ExecutionStatus, wall_ms: &[f64]) -> Self {
        Self {
            status,
            wall_ms: wall_ms.to_vec(),
            sleep: false,
            transport_error: false,
        }
    }

    pub fn sleeping(mut self) -> Self {
        self.sleep = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedRule {
    #[serde(default)]
    pub code_contains: Option<String>,
    #[serde(default)]
    pub test_contains: Option<String>,
    #[serde(flatten)]
    pub outcome: ScriptedOutcome,
}

impl ScriptedRule {
    fn matches(&self, job: &Job) -> bool {
        self.code_contains
            .as_deref()
            .is_none_or(|s| job.code.contains(s))
            && self
                .test_contains
                .as_deref()
                .is_none_or(|s| job.test.contains(s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedBackend {
    pub default: ScriptedOutcome,
    #[serde(default)]
    pub rules: Vec<ScriptedRule>,
}

impl ScriptedBackend {
    pub fn new(default: ScriptedOutcome) -> Self {
        Self {
            default,
            rules: Vec::new(),
        }
    }

    pub fn rule(
        mut self,
        code_contains: Option<&str>,
        test_contains: Option<&str>,
        outcome: ScriptedOutcome,
    ) -> Self {
        self.rules.push(ScriptedRule {
            code_contains: code_contains.map(str::to_owned),
            test_contains: test_contains.map(str::to_owned),
            outcome,
        });
        self
    }

    pub fn from_file(path: &Path) -> Result<Self, InfraError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InfraError(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| InfraError(format!("parsing {}: {e}", path.display())))
    }

    fn lookup(&self, job: &Job) -> &ScriptedOutcome {
        self.rules
            .iter()
            .find(|r| r.matches(job))
            .map_or(&self.default, |r| &r.outcome)
    }
}

impl RunnerBackend for ScriptedBackend {
    fn run(&self, job: &Job) -> Result<RawOutcome, InfraError> {
        let outcome = self.lookup(job);
        if outcome.transport_error {
            return Err(InfraError("scripted transport failure".into()));
        }
        let reported = if outcome.wall_ms.is_empty() {
            0.0
        } else {
            outcome.wall_ms[job.repetition as usize % outcome.wall_ms.len()]
        };
        let wall_time_ms = if outcome.sleep {
            let start = Instant::now();
            thread::sleep(Duration::from_secs_f64(reported / 1000.0));
            start.elapsed().as_secs_f64() * 1000.0
        } else {
            reported
        };
        let class = match outcome.status {
            ExecutionStatus::Pass => ExitClass::Completed,
            ExecutionStatus::Fail => ExitClass::AssertionFailed,
            ExecutionStatus::Timeout => ExitClass::TimedOut,
            ExecutionStatus::Error => ExitClass::Crashed,
        };
        Ok(RawOutcome::new(class, wall_time_ms))
    }
}
