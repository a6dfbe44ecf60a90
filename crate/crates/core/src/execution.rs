//! Outcome records for running one code against one test.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::LinkMatrix;

pub const DEFAULT_TIME_LIMIT_MS: u64 = 5_000;
pub const DEFAULT_MAX_OUTPUT: usize = 64 * 1024;
pub const DEFAULT_GRACE_MS: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionStatus {
    Pass,
    Fail,
    Timeout,
    Error,
}

impl ExecutionStatus {
    /// Only a clean pass counts as a link; timeouts and errors do not.
    pub fn is_pass(self) -> bool {
        self == ExecutionStatus::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutionLimits {
    pub time_limit_ms: u64,
    pub memory_limit_bytes: Option<u64>,
    pub max_output_bytes: usize,
    /// Extra time the supervisor waits for a backend beyond `time_limit_ms`.
    pub grace_ms: u64,
}

impl Default for ExecutionLimits {
    fn default() -> Self {
        Self {
            time_limit_ms: DEFAULT_TIME_LIMIT_MS,
            memory_limit_bytes: None,
            max_output_bytes: DEFAULT_MAX_OUTPUT,
            grace_ms: DEFAULT_GRACE_MS,
        }
    }
}

impl ExecutionLimits {
    pub fn with_time_limit_ms(mut self, ms: u64) -> Self {
        self.time_limit_ms = ms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_limit_ms == 0 {
            return Err(Error::InvalidParameter("time limit must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub code_idx: usize,
    pub test_idx: usize,
    pub status: ExecutionStatus,
    pub wall_time_ms: f64,
}

/// Builds the link matrix from one record per cell; order of `records` is
/// irrelevant.
pub fn link_matrix_from_records(
    n_codes: usize,
    n_tests: usize,
    records: &[ExecutionRecord],
) -> Result<LinkMatrix> {
    let mut cells: Vec<Option<bool>> = alloc::vec![None; n_codes * n_tests];
    for r in records {
        if r.code_idx >= n_codes || r.test_idx >= n_tests {
            return Err(Error::InvalidParameter("record index out of range"));
        }
        let slot = &mut cells[r.code_idx * n_tests + r.test_idx];
        if slot.is_some() {
            return Err(Error::InvalidParameter("duplicate record for a cell"));
        }
        *slot = Some(r.status.is_pass());
    }
    let links = cells
        .into_iter()
        .collect::<Option<Vec<bool>>>()
        .ok_or(Error::InvalidParameter("missing record for a cell"))?;
    LinkMatrix::new(n_codes, n_tests, links)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(c: usize, t: usize, status: ExecutionStatus) -> ExecutionRecord {
        ExecutionRecord {
            code_idx: c,
            test_idx: t,
            status,
            wall_time_ms: 1.0,
        }
    }

    #[test]
    fn records_to_matrix() {
        use ExecutionStatus::*;
        let recs = vec![
            rec(1, 1, Timeout),
            rec(0, 0, Pass),
            rec(0, 1, Pass),
            rec(1, 0, Pass),
        ];
        let m = link_matrix_from_records(2, 2, &recs).unwrap();
        assert_eq!(m.row(0), &[true, true]);
        assert_eq!(m.row(1), &[true, false]);
    }

    #[test]
    fn incomplete_or_duplicate_records_rejected() {
        use ExecutionStatus::*;
        assert!(link_matrix_from_records(1, 2, &[rec(0, 0, Pass)]).is_err());
        assert!(link_matrix_from_records(1, 1, &[rec(0, 0, Pass), rec(0, 0, Fail)]).is_err());
    }
}
