//! Selection of correctness and efficiency preference pairs.
//!
//! At most one pair of each type is produced per problem: the top- and
//! bottom-ranked codes for correctness, the fastest and slowest qualified
//! codes for efficiency. Near-ties are dropped.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::LinkMatrix;
use crate::problem::Problem;
use crate::ranking::{rank_candidates, Ranking};
use crate::scoring::{ScoreState, SweepOrder};
use crate::timing::TimingSummary;

pub const DEFAULT_DELTA: f64 = 0.10;
pub const DEFAULT_GAMMA: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairType {
    Correctness,
    Efficiency,
}

/// Minimum relative gaps below which a pair is considered a near-tie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairThresholds {
    /// `(top - low) / top` must reach this for a correctness pair.
    pub delta: f64,
    /// `slow >= (1 + gamma) * fast` must hold for an efficiency pair.
    pub gamma: f64,
}

impl Default for PairThresholds {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            gamma: DEFAULT_GAMMA,
        }
    }
}

impl PairThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.delta.is_nan() || self.gamma.is_nan() || self.delta < 0.0 || self.gamma < 0.0 {
            return Err(Error::InvalidParameter(
                "pair thresholds must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Settings that produced a pair, carried along for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub damping: f64,
    pub iterations: u32,
    pub sweep: SweepOrder,
    pub delta: f64,
    pub gamma: f64,
    pub repetitions: u32,
    pub time_limit_ms: u64,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub chosen_idx: usize,
    pub rejected_idx: usize,
    pub chosen_score: f64,
    pub rejected_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected_time_ms: Option<f64>,
    pub config: ConfigSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub problem_id: String,
    pub prompt: String,
    pub chosen: String,
    pub rejected: String,
    pub pair_type: PairType,
    pub meta: PairMeta,
}

/// Tests passed by the top-ranked code.
///
/// If several codes tie for the top score the intersection of their
/// pass-sets is returned. The result may be empty.
pub fn select_credible_tests(matrix: &LinkMatrix, ranking: &Ranking) -> Result<Vec<usize>> {
    if ranking.order.len() != matrix.n_codes() {
        return Err(Error::DimensionMismatch {
            what: "ranking",
            expected: matrix.n_codes(),
            found: ranking.order.len(),
        });
    }
    let top = ranking.top_group();
    Ok((0..matrix.n_tests())
        .filter(|&j| top.iter().all(|&i| matrix.passes(i, j)))
        .collect())
}

fn check_codes(problem: &Problem, n: usize, what: &'static str) -> Result<()> {
    if problem.codes.len() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: problem.codes.len(),
            found: n,
        });
    }
    Ok(())
}

/// Top- versus bottom-ranked code, if their relative score gap reaches
/// `delta`.
pub fn select_correctness_pair(
    problem: &Problem,
    state: &ScoreState,
    delta: f64,
    snapshot: &ConfigSnapshot,
) -> Result<Option<PreferencePair>> {
    check_codes(problem, state.code_scores.len(), "code scores")?;
    if problem.codes.len() < 2 {
        return Ok(None);
    }
    let ranking = rank_candidates(state);
    let (top, low) = match (ranking.top(), ranking.bottom()) {
        (Some(t), Some(l)) => (t, l),
        _ => return Ok(None),
    };
    let (top_score, low_score) = (state.code_scores[top], state.code_scores[low]);
    if top_score <= low_score || top_score <= 0.0 {
        return Ok(None);
    }
    if (top_score - low_score) / top_score < delta {
        return Ok(None);
    }
    if problem.codes[top] == problem.codes[low] {
        return Ok(None);
    }
    Ok(Some(PreferencePair {
        problem_id: problem.problem_id.clone(),
        prompt: problem.prompt.clone(),
        chosen: problem.codes[top].clone(),
        rejected: problem.codes[low].clone(),
        pair_type: PairType::Correctness,
        meta: PairMeta {
            chosen_idx: top,
            rejected_idx: low,
            chosen_score: top_score,
            rejected_score: low_score,
            chosen_time_ms: None,
            rejected_time_ms: None,
            config: snapshot.clone(),
        },
    }))
}

/// Fastest versus slowest qualified code, if the slow one takes at least
/// `(1 + gamma)` times as long.
///
/// `code_scores` only feeds the pair metadata.
pub fn select_efficiency_pair(
    problem: &Problem,
    timings: &[TimingSummary],
    code_scores: &[f64],
    gamma: f64,
    snapshot: &ConfigSnapshot,
) -> Result<Option<PreferencePair>> {
    check_codes(problem, code_scores.len(), "code scores")?;
    if let Some(t) = timings.iter().find(|t| t.code_idx >= problem.codes.len()) {
        return Err(Error::DimensionMismatch {
            what: "timing code index",
            expected: problem.codes.len(),
            found: t.code_idx,
        });
    }
    let qualified: Vec<&TimingSummary> = timings.iter().filter(|t| !t.disqualified).collect();
    if qualified.len() < 2 {
        return Ok(None);
    }
    let fast = qualified
        .iter()
        .min_by(|a, b| {
            a.total_time_ms
                .total_cmp(&b.total_time_ms)
                .then(a.code_idx.cmp(&b.code_idx))
        })
        .copied();
    let slow = qualified
        .iter()
        .max_by(|a, b| {
            a.total_time_ms
                .total_cmp(&b.total_time_ms)
                .then(b.code_idx.cmp(&a.code_idx))
        })
        .copied();
    let (fast, slow) = match (fast, slow) {
        (Some(f), Some(s)) => (f, s),
        _ => return Ok(None),
    };
    if slow.total_time_ms <= fast.total_time_ms
        || slow.total_time_ms < (1.0 + gamma) * fast.total_time_ms
    {
        return Ok(None);
    }
    let (ci, ri) = (fast.code_idx, slow.code_idx);
    if problem.codes[ci] == problem.codes[ri] {
        return Ok(None);
    }
    Ok(Some(PreferencePair {
        problem_id: problem.problem_id.clone(),
        prompt: problem.prompt.clone(),
        chosen: problem.codes[ci].clone(),
        rejected: problem.codes[ri].clone(),
        pair_type: PairType::Efficiency,
        meta: PairMeta {
            chosen_idx: ci,
            rejected_idx: ri,
            chosen_score: code_scores[ci],
            rejected_score: code_scores[ri],
            chosen_time_ms: Some(fast.total_time_ms),
            rejected_time_ms: Some(slow.total_time_ms),
            config: snapshot.clone(),
        },
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    /// Total baseline time over total optimized time.
    pub speedup_ratio: f64,
    /// Fraction of common problems at least 10% faster after optimization.
    pub percent_optimized: f64,
    pub n_common: usize,
}

/// Speed-up statistics over the problems solved both before and after.
pub fn speedup_stats(
    before: &BTreeMap<String, f64>,
    after: &BTreeMap<String, f64>,
) -> Result<SpeedupReport> {
    let common: Vec<(f64, f64)> = before
        .iter()
        .filter_map(|(id, &b)| after.get(id).map(|&a| (b, a)))
        .collect();
    if common.is_empty() {
        return Err(Error::UndefinedStatistics(
            "no problem solved both before and after",
        ));
    }
    let total_before: f64 = common.iter().map(|(b, _)| b).sum();
    let total_after: f64 = common.iter().map(|(_, a)| a).sum();
    if !(total_after > 0.0 && total_before > 0.0) {
        return Err(Error::UndefinedStatistics(
            "total execution time must be positive",
        ));
    }
    // after <= 0.9 * before, scaled to stay exact on integral inputs
    let optimized = common.iter().filter(|(b, a)| a * 10.0 <= b * 9.0).count();
    Ok(SpeedupReport {
        speedup_ratio: total_before / total_after,
        percent_optimized: optimized as f64 / common.len() as f64,
        n_common: common.len(),
    })
}
