//! Backend that hands each job to a fresh harness process.
//!
//! Wire protocol: the job is written to the child's stdin as one JSON
//! object `{"code", "test", "time_limit_ms"}`; the child prints exactly one
//! line `{"status", "wall_time_ms", "error_kind"?}` on stdout and exits with
//! 0 (pass/fail), 2 (timeout), 3 (error) or 4 (protocol).

use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::backend::{ExitClass, InfraError, Job, RawOutcome, RunnerBackend};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TIMEOUT: i32 = 2;
pub const EXIT_ERROR: i32 = 3;
pub const EXIT_PROTOCOL: i32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessJob<'a> {
    pub code: &'a str,
    pub test: &'a str,
    pub time_limit_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarnessStatus {
    Pass,
    Fail,
    Timeout,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessResult {
    pub status: HarnessStatus,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<String>,
}

/// Parses the harness's stdout and exit code into an outcome.
pub fn parse_harness_output(
    stdout: &str,
    exit_code: Option<i32>,
) -> Result<RawOutcome, InfraError> {
    let line = stdout
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| {
            InfraError(format!(
                "harness printed no result line (exit {exit_code:?})"
            ))
        })?;
    let result: HarnessResult = serde_json::from_str(line)
        .map_err(|e| InfraError(format!("malformed harness result {line:?}: {e}")))?;

    if exit_code == Some(EXIT_PROTOCOL) || result.error_kind.as_deref() == Some("protocol") {
        return Err(InfraError("harness rejected the job document".into()));
    }
    let (class, expected_exit) = match result.status {
        HarnessStatus::Pass => (ExitClass::Completed, EXIT_OK),
        HarnessStatus::Fail => (ExitClass::AssertionFailed, EXIT_OK),
        HarnessStatus::Timeout => (ExitClass::TimedOut, EXIT_TIMEOUT),
        HarnessStatus::Error => (ExitClass::Crashed, EXIT_ERROR),
    };
    if let Some(code) = exit_code {
        if code != expected_exit {
            return Err(InfraError(format!(
                "harness exit code {code} does not match status {:?}",
                result.status
            )));
        }
    }
    Ok(RawOutcome {
        class,
        wall_time_ms: result.wall_time_ms as f64,
        diagnostic: result.error_kind.unwrap_or_default(),
    })
}

/// Runs the harness command once per job.
#[derive(Debug, Clone)]
pub struct SubprocessBackend {
    command: Vec<String>,
}

impl SubprocessBackend {
    pub fn new(command: Vec<String>) -> Result<Self, InfraError> {
        if command.is_empty() {
            return Err(InfraError("empty harness command".into()));
        }
        Ok(Self { command })
    }

    fn spawn(&self, job: &Job) -> Result<Child, InfraError> {
        let mut cmd = Command::new(&self.command[0]);
        cmd.args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .env("PYTHONHASHSEED", "0");
        #[cfg(unix)]
        if let Some(bytes) = job.limits.memory_limit_bytes {
            use std::os::unix::process::CommandExt;
            // SAFETY: setrlimit is async-signal-safe and touches no Rust state.
            unsafe {
                cmd.pre_exec(move || {
                    let lim = libc::rlimit {
                        rlim_cur: bytes as libc::rlim_t,
                        rlim_max: bytes as libc::rlim_t,
                    };
                    if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                        return Err(std::io::Error::last_os_error());
                    }
                    Ok(())
                });
            }
        }
        cmd.spawn()
            .map_err(|e| InfraError(format!("spawning {:?}: {e}", self.command)))
    }
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>, cap: usize) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(p) = pipe {
            let _ = p.take(cap as u64).read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

impl RunnerBackend for SubprocessBackend {
    fn run(&self, job: &Job) -> Result<RawOutcome, InfraError> {
        let doc = serde_json::to_string(&HarnessJob {
            code: &job.code,
            test: &job.test,
            time_limit_ms: job.limits.time_limit_ms,
        })
        .map_err(|e| InfraError(e.to_string()))?;

        let start = Instant::now();
        let mut child = self.spawn(job)?;
        if let Some(mut stdin) = child.stdin.take() {
            // a harness that exits early closes the pipe; its result line says why
            let _ = stdin.write_all(doc.as_bytes());
        }
        // the result line is small; anything beyond max_output is candidate noise
        let cap = job.limits.max_output_bytes.max(4096);
        let out = drain(child.stdout.take(), cap);
        let err = drain(child.stderr.take(), cap);

        let deadline = Duration::from_millis(job.limits.time_limit_ms + job.limits.grace_ms);
        let status = child
            .wait_timeout(deadline)
            .map_err(|e| InfraError(format!("waiting for harness: {e}")))?;
        let status = match status {
            Some(s) => s,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(RawOutcome {
                    class: ExitClass::TimedOut,
                    wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
                    diagnostic: "killed by supervisor".into(),
                });
            }
        };
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();

        match status.code() {
            // killed by a signal, e.g. after exceeding the memory limit
            None => Ok(RawOutcome {
                class: ExitClass::Crashed,
                wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
                diagnostic: format!("terminated by signal: {status}"),
            }),
            Some(code) => parse_harness_output(&stdout, Some(code)).map_err(|e| {
                let tail: String = stderr
                    .chars()
                    .rev()
                    .take(300)
                    .collect::<Vec<_>>()
                    .into_iter()
                    .rev()
                    .collect();
                InfraError(format!("{}; stderr: {tail}", e.0))
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_status() {
        let cases = [
            (
                r#"{"status":"pass","wall_time_ms":3}"#,
                0,
                ExitClass::Completed,
            ),
            (
                r#"{"status":"fail","wall_time_ms":3}"#,
                0,
                ExitClass::AssertionFailed,
            ),
            (
                r#"{"status":"timeout","wall_time_ms":500}"#,
                2,
                ExitClass::TimedOut,
            ),
            (
                r#"{"status":"error","wall_time_ms":1,"error_kind":"NameError"}"#,
                3,
                ExitClass::Crashed,
            ),
        ];
        for (line, code, class) in cases {
            let o = parse_harness_output(line, Some(code)).unwrap();
            assert_eq!(o.class, class);
        }
    }

    #[test]
    fn protocol_failures_are_infrastructure() {
        assert!(parse_harness_output(
            r#"{"status":"error","wall_time_ms":0,"error_kind":"protocol"}"#,
            Some(4)
        )
        .is_err());
        assert!(parse_harness_output("not json", Some(0)).is_err());
        assert!(parse_harness_output("", Some(0)).is_err());
        assert!(parse_harness_output(r#"{"status":"pass","wall_time_ms":1}"#, Some(3)).is_err());
    }

    #[test]
    fn job_document_shape() {
        let doc = serde_json::to_string(&HarnessJob {
            code: "def f():\n  return 1",
            test: "assert f() == 1",
            time_limit_ms: 500,
        })
        .unwrap();
        assert_eq!(
            doc,
            r#"{"code":"def f():\n  return 1","test":"assert f() == 1","time_limit_ms":500}"#
        );
    }

    #[test]
    fn empty_command_rejected() {
        assert!(SubprocessBackend::new(vec![]).is_err());
    }
}
