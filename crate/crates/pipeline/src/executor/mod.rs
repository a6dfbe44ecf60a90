//! Supervised execution of candidate codes against candidate tests.
//!
//! Every (code, test) cell is one job on a [`RunnerBackend`]. The
//! supervisor enforces the time limit on its own monotonic clock, retries
//! infrastructure failures a bounded number of times, and merges results
//! by index so the outcome never depends on scheduling.

mod backend;
mod pool;
mod scripted;
mod subprocess;

use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use mutval_core::execution::link_matrix_from_records;
use mutval_core::timing::summarize_timings;
use mutval_core::{
    ExecutionLimits, ExecutionRecord, ExecutionStatus, GroundTruth, LinkMatrix, TimingSummary,
};
use thiserror::Error;

pub use backend::{ExitClass, FnBackend, InfraError, Job, RawOutcome, RunnerBackend};
pub use pool::run_indexed;
pub use scripted::{ScriptedBackend, ScriptedOutcome, ScriptedRule};
pub use subprocess::{
    parse_harness_output, HarnessJob, HarnessResult, HarnessStatus, SubprocessBackend, EXIT_ERROR,
    EXIT_OK, EXIT_PROTOCOL, EXIT_TIMEOUT,
};

pub const DEFAULT_MAX_RETRIES: u32 = 2;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Infra(#[from] InfraError),
    #[error("code {code_idx} x test {test_idx}: gave up after {attempts} attempts: {source}")]
    Aborted {
        code_idx: usize,
        test_idx: usize,
        attempts: u32,
        source: InfraError,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] mutval_core::Error),
}

/// Status and supervisor-side timing of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub status: ExecutionStatus,
    pub wall_time_ms: f64,
    pub diagnostic: String,
}

#[derive(Clone)]
pub struct Executor {
    backend: Arc<dyn RunnerBackend>,
    limits: ExecutionLimits,
    parallelism: usize,
    max_retries: u32,
}

impl Executor {
    pub fn new(
        backend: Arc<dyn RunnerBackend>,
        limits: ExecutionLimits,
        parallelism: usize,
    ) -> Self {
        Self {
            backend,
            limits,
            parallelism: parallelism.max(1),
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn with_max_retries(mut self, retries: u32) -> Self {
        self.max_retries = retries;
        self
    }

    pub fn limits(&self) -> &ExecutionLimits {
        &self.limits
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism
    }

    /// Runs one job under the supervisor. Infrastructure failures are
    /// returned as errors, never as a candidate status.
    pub fn execute_cell(&self, code: &str, test: &str) -> Result<CellOutcome, ExecError> {
        self.execute_job(code, test, 0)
    }

    fn execute_job(
        &self,
        code: &str,
        test: &str,
        repetition: u32,
    ) -> Result<CellOutcome, ExecError> {
        if code.trim().is_empty() || test.trim().is_empty() {
            return Err(ExecError::Invalid("code and test must be non-empty".into()));
        }
        self.limits.validate()?;
        let job = Job {
            code: code.to_owned(),
            test: test.to_owned(),
            limits: self.limits,
            repetition,
        };
        supervise(&self.backend, job).map_err(ExecError::from)
    }

    fn execute_with_retries(
        &self,
        code_idx: usize,
        test_idx: usize,
        code: &str,
        test: &str,
        repetition: u32,
    ) -> Result<CellOutcome, ExecError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.execute_job(code, test, repetition) {
                Err(ExecError::Infra(e)) if attempt > self.max_retries => {
                    return Err(ExecError::Aborted {
                        code_idx,
                        test_idx,
                        attempts: attempt,
                        source: e,
                    });
                }
                Err(ExecError::Infra(e)) => {
                    log::debug!("retrying cell ({code_idx}, {test_idx}): {e}");
                }
                other => return other,
            }
        }
    }

    /// Runs every code against every test and builds the link matrix.
    ///
    /// Records come back ordered by (code, test). Any cell that still hits
    /// an infrastructure failure after retries aborts the whole problem.
    pub fn execute_problem_matrix(
        &self,
        codes: &[String],
        tests: &[String],
    ) -> Result<(LinkMatrix, Vec<ExecutionRecord>), ExecError> {
        if codes.is_empty() || tests.is_empty() {
            return Err(ExecError::Invalid(
                "need at least one code and one test".into(),
            ));
        }
        let n_tests = tests.len();
        let records = run_indexed(codes.len() * n_tests, self.parallelism, |k| {
            let (i, j) = (k / n_tests, k % n_tests);
            let out = self.execute_with_retries(i, j, &codes[i], &tests[j], 0)?;
            Ok::<_, ExecError>(ExecutionRecord {
                code_idx: i,
                test_idx: j,
                status: out.status,
                wall_time_ms: out.wall_time_ms,
            })
        })?;
        let matrix = link_matrix_from_records(codes.len(), n_tests, &records)?;
        Ok((matrix, records))
    }

    /// Times one code over the credible tests, `repetitions` runs each.
    ///
    /// `credible` pairs each test's index in the problem with its text.
    pub fn measure_credible_time(
        &self,
        code_idx: usize,
        code: &str,
        credible: &[(usize, &str)],
        repetitions: u32,
    ) -> Result<TimingSummary, ExecError> {
        if repetitions == 0 {
            return Err(ExecError::Invalid("repetitions must be at least 1".into()));
        }
        if credible.is_empty() {
            return Err(ExecError::Invalid("credible test set is empty".into()));
        }
        let reps = repetitions as usize;
        let runs = run_indexed(credible.len() * reps, self.parallelism, |k| {
            let (t, rep) = (k / reps, k % reps);
            let (test_idx, test) = credible[t];
            self.execute_with_retries(code_idx, test_idx, code, test, rep as u32)
        })?;
        let any_failure = runs.iter().any(|o| o.status != ExecutionStatus::Pass);
        let samples: Vec<(usize, Vec<f64>)> = credible
            .iter()
            .enumerate()
            .map(|(t, &(test_idx, _))| {
                let times = runs[t * reps..(t + 1) * reps]
                    .iter()
                    .map(|o| o.wall_time_ms)
                    .collect();
                (test_idx, times)
            })
            .collect();
        Ok(summarize_timings(
            code_idx,
            &samples,
            any_failure,
            self.limits.time_limit_ms,
            repetitions,
        )?)
    }

    /// Fraction of trusted oracle tests each code passes.
    pub fn actual_accuracy(
        &self,
        codes: &[String],
        oracle_tests: &[String],
    ) -> Result<GroundTruth, ExecError> {
        if oracle_tests.is_empty() {
            return Err(ExecError::Invalid("need at least one oracle test".into()));
        }
        let (matrix, _) = self.execute_problem_matrix(codes, oracle_tests)?;
        Ok(GroundTruth::from_oracle_matrix(&matrix))
    }
}

/// Runs `job` on a helper thread and waits at most limit + grace for it.
fn supervise(backend: &Arc<dyn RunnerBackend>, job: Job) -> Result<CellOutcome, InfraError> {
    let limit_ms = job.limits.time_limit_ms as f64;
    let deadline = Duration::from_millis(job.limits.time_limit_ms + job.limits.grace_ms);
    let (tx, rx) = mpsc::channel();
    let worker = Arc::clone(backend);
    let start = Instant::now();
    thread::Builder::new()
        .name("mutval-cell".into())
        .spawn(move || {
            let _ = tx.send(worker.run(&job));
        })
        .map_err(|e| InfraError(format!("spawning supervisor thread: {e}")))?;

    let raw = match rx.recv_timeout(deadline) {
        Ok(r) => r?,
        Err(mpsc::RecvTimeoutError::Timeout) => {
            // the backend thread is abandoned; subprocess backends kill their
            // own child before this point
            return Ok(CellOutcome {
                status: ExecutionStatus::Timeout,
                wall_time_ms: (start.elapsed().as_secs_f64() * 1000.0).max(limit_ms),
                diagnostic: "supervisor deadline exceeded".into(),
            });
        }
        Err(mpsc::RecvTimeoutError::Disconnected) => {
            return Err(InfraError("backend panicked".into()));
        }
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;

    let status = match raw.class {
        ExitClass::TimedOut => ExecutionStatus::Timeout,
        _ if raw.wall_time_ms > limit_ms => ExecutionStatus::Timeout,
        ExitClass::Completed => ExecutionStatus::Pass,
        ExitClass::AssertionFailed => ExecutionStatus::Fail,
        ExitClass::Crashed => ExecutionStatus::Error,
    };
    let wall_time_ms = if status == ExecutionStatus::Timeout {
        raw.wall_time_ms.max(elapsed_ms.min(limit_ms)).max(limit_ms)
    } else {
        raw.wall_time_ms
    };
    Ok(CellOutcome {
        status,
        wall_time_ms,
        diagnostic: raw.diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    fn scripted(b: ScriptedBackend) -> Arc<dyn RunnerBackend> {
        Arc::new(b)
    }

    fn limits(ms: u64) -> ExecutionLimits {
        ExecutionLimits::default().with_time_limit_ms(ms)
    }

    #[test]
    fn pass_echoes_reported_time() {
        let b = ScriptedBackend::new(ScriptedOutcome::new(ExecutionStatus::Pass, &[12.0]));
        let ex = Executor::new(scripted(b), limits(5000), 1);
        let out = ex.execute_cell("def f(): pass", "assert True").unwrap();
        assert_eq!(out.status, ExecutionStatus::Pass);
        assert_eq!(out.wall_time_ms, 12.0);
    }

    #[test]
    fn assertion_failure_is_fail() {
        let b = ScriptedBackend::new(ScriptedOutcome::new(ExecutionStatus::Fail, &[1.0]));
        let ex = Executor::new(scripted(b), limits(5000), 1);
        assert_eq!(
            ex.execute_cell("c", "t").unwrap().status,
            ExecutionStatus::Fail
        );
    }

    #[test]
    fn crash_is_error() {
        let b = ScriptedBackend::new(ScriptedOutcome::new(ExecutionStatus::Error, &[1.0]));
        let ex = Executor::new(scripted(b), limits(5000), 1);
        assert_eq!(
            ex.execute_cell("c", "t").unwrap().status,
            ExecutionStatus::Error
        );
    }

    #[test]
    fn sleeping_past_limit_times_out() {
        let b =
            ScriptedBackend::new(ScriptedOutcome::new(ExecutionStatus::Pass, &[200.0]).sleeping());
        let ex = Executor::new(scripted(b), limits(100), 1);
        let out = ex.execute_cell("c", "t").unwrap();
        assert_eq!(out.status, ExecutionStatus::Timeout);
        assert!(out.wall_time_ms >= 100.0);
    }

    #[test]
    fn hung_backend_is_abandoned_at_deadline() {
        let b = FnBackend(|_: &Job| {
            thread::sleep(Duration::from_secs(30));
            Ok(RawOutcome::new(ExitClass::Completed, 1.0))
        });
        let mut lim = limits(50);
        lim.grace_ms = 100;
        let ex = Executor::new(Arc::new(b), lim, 1);
        let start = Instant::now();
        let out = ex.execute_cell("c", "t").unwrap();
        let took = start.elapsed().as_millis() as u64;
        assert_eq!(out.status, ExecutionStatus::Timeout);
        assert!(out.wall_time_ms >= 50.0);
        assert!(took < 50 + 100 + 200, "took {took} ms");
    }

    #[test]
    fn transport_failure_is_an_error_not_a_status() {
        let b = FnBackend(|_: &Job| Err(InfraError("socket closed".into())));
        let ex = Executor::new(Arc::new(b), limits(1000), 1);
        assert!(matches!(
            ex.execute_cell("c", "t"),
            Err(ExecError::Infra(_))
        ));
    }

    #[test]
    fn retries_then_succeeds() {
        let calls = Arc::new(AtomicU32::new(0));
        let c = Arc::clone(&calls);
        let b = FnBackend(move |_: &Job| {
            if c.fetch_add(1, Ordering::SeqCst) < 2 {
                Err(InfraError("flaky".into()))
            } else {
                Ok(RawOutcome::new(ExitClass::Completed, 2.0))
            }
        });
        let ex = Executor::new(Arc::new(b), limits(1000), 1);
        let (m, _) = ex
            .execute_problem_matrix(&["c".into()], &["t".into()])
            .unwrap();
        assert!(m.passes(0, 0));
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn persistent_infra_failure_aborts_problem() {
        let b = ScriptedBackend::new(ScriptedOutcome::new(ExecutionStatus::Pass, &[1.0])).rule(
            Some("bad"),
            None,
            ScriptedOutcome {
                transport_error: true,
                ..ScriptedOutcome::new(ExecutionStatus::Pass, &[1.0])
            },
        );
        let ex = Executor::new(scripted(b), limits(1000), 2);
        let err = ex
            .execute_problem_matrix(&["good".into(), "bad".into()], &["t".into()])
            .unwrap_err();
        assert!(matches!(
            err,
            ExecError::Aborted {
                code_idx: 1,
                attempts: 3,
                ..
            }
        ));
    }

    #[test]
    fn empty_inputs_rejected() {
        let b = ScriptedBackend::new(ScriptedOutcome::new(ExecutionStatus::Pass, &[1.0]));
        let ex = Executor::new(scripted(b), limits(1000), 1);
        assert!(ex.execute_cell("", "t").is_err());
        assert!(ex.execute_problem_matrix(&[], &["t".into()]).is_err());
        assert!(ex.measure_credible_time(0, "c", &[], 5).is_err());
    }
}
