//! Aggregation of repeated timing runs over a credible test set.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_REPETITIONS: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub code_idx: usize,
    /// Sum of per-test medians, or the max penalty when disqualified.
    pub total_time_ms: f64,
    pub per_test: Vec<(usize, f64)>,
    pub repetitions: u32,
    pub disqualified: bool,
}

/// Median; even-length inputs average the two middle values.
pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// Penalty charged to a code that fails any credible test.
pub fn max_penalty_ms(time_limit_ms: u64, n_credible: usize) -> f64 {
    time_limit_ms as f64 * n_credible as f64
}

/// Folds raw per-test samples into a [`TimingSummary`].
///
/// `samples` holds `(test_idx, wall times of every repetition)`. When
/// `any_failure` is set the code is disqualified and charged
/// [`max_penalty_ms`].
pub fn summarize_timings(
    code_idx: usize,
    samples: &[(usize, Vec<f64>)],
    any_failure: bool,
    time_limit_ms: u64,
    repetitions: u32,
) -> Result<TimingSummary> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("credible test set is empty"));
    }
    let per_test = samples
        .iter()
        .filter_map(|(t, s)| median(s).map(|m| (*t, m)))
        .collect::<Vec<_>>();
    let total_time_ms = if any_failure {
        max_penalty_ms(time_limit_ms, samples.len())
    } else {
        per_test.iter().map(|(_, m)| m).sum()
    };
    Ok(TimingSummary {
        code_idx,
        total_time_ms,
        per_test,
        repetitions,
        disqualified: any_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn median_of_five() {
        assert_eq!(median(&[10.0, 11.0, 10.0, 12.0, 10.0]), Some(10.0));
        assert_eq!(median(&[1.0, 3.0]), Some(2.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn single_test_total_is_its_median() {
        let s = summarize_timings(
            0,
            &[(0, vec![10.0, 11.0, 10.0, 12.0, 10.0])],
            false,
            5000,
            5,
        )
        .unwrap();
        assert_eq!(s.per_test, vec![(0, 10.0)]);
        assert_eq!(s.total_time_ms, 10.0);
        assert!(!s.disqualified);
    }

    #[test]
    fn failure_charges_penalty() {
        let samples = vec![(0, vec![1.0]), (1, vec![1.0]), (2, vec![1.0])];
        let s = summarize_timings(3, &samples, true, 5000, 1).unwrap();
        assert!(s.disqualified);
        assert_eq!(s.total_time_ms, 15_000.0);
    }

    #[test]
    fn totals_add_across_tests() {
        let samples = vec![(0, vec![7.0, 7.0, 7.0]), (4, vec![6.0, 7.0, 8.0])];
        let s = summarize_timings(0, &samples, false, 5000, 3).unwrap();
        assert_eq!(s.total_time_ms, 14.0);
    }

    #[test]
    fn one_outlier_does_not_move_median() {
        assert_eq!(median(&[10.0, 10.0, 900.0]), Some(10.0));
    }
}
