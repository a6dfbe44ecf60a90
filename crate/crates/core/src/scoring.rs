//! Self-validation scoring: the mutual-reinforcement fixed point between
//! candidate codes and candidate tests.
//!
//! Every code and every test starts at score 1. Each iteration blends a
//! node's previous score with the summed scores of the nodes it is linked
//! to:
//!
//! ```text
//! test_j <- (1 - d) * test_j + d * sum_i code_i * link(i, j)
//! code_i <- (1 - d) * code_i + d * sum_j test_j * link(i, j)
//! ```
//!
//! Scores are never renormalized, so magnitudes grow with the number of
//! links and are only comparable within one problem.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::LinkMatrix;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_ITERATIONS: u32 = 10;

/// Order in which the two halves of an iteration are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// Update tests from the previous code scores, then update codes from
    /// the freshly updated test scores.
    #[default]
    TestsFirst,
    /// Update both sides from the previous iteration's scores.
    Simultaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    pub damping: f64,
    pub iterations: u32,
    pub sweep: SweepOrder,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            damping: DEFAULT_DAMPING,
            iterations: DEFAULT_ITERATIONS,
            sweep: SweepOrder::TestsFirst,
        }
    }
}

impl ScoringConfig {
    pub fn new(damping: f64, iterations: u32) -> Result<Self> {
        let cfg = Self {
            damping,
            iterations,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sweep(mut self, sweep: SweepOrder) -> Self {
        self.sweep = sweep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.damping) {
            return Err(Error::InvalidParameter("damping must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Per-candidate scores after `iteration` sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreState {
    pub code_scores: Vec<f64>,
    pub test_scores: Vec<f64>,
    pub iteration: u32,
}

impl ScoreState {
    /// All-ones starting point for `matrix`.
    pub fn initial(matrix: &LinkMatrix) -> Self {
        Self {
            code_scores: vec![1.0; matrix.n_codes()],
            test_scores: vec![1.0; matrix.n_tests()],
            iteration: 0,
        }
    }

    fn check_dims(&self, matrix: &LinkMatrix) -> Result<()> {
        if self.code_scores.len() != matrix.n_codes() {
            return Err(Error::DimensionMismatch {
                what: "code scores",
                expected: matrix.n_codes(),
                found: self.code_scores.len(),
            });
        }
        if self.test_scores.len() != matrix.n_tests() {
            return Err(Error::DimensionMismatch {
                what: "test scores",
                expected: matrix.n_tests(),
                found: self.test_scores.len(),
            });
        }
        Ok(())
    }
}

/// Applies one sweep to `state` in place.
pub fn step(matrix: &LinkMatrix, state: &mut ScoreState, config: &ScoringConfig) -> Result<()> {
    config.validate()?;
    state.check_dims(matrix)?;
    let d = config.damping;
    let keep = 1.0 - d;

    let new_tests: Vec<f64> = (0..matrix.n_tests())
        .map(|j| {
            let support: f64 = state
                .code_scores
                .iter()
                .enumerate()
                .filter(|&(i, _)| matrix.passes(i, j))
                .map(|(_, s)| s)
                .sum();
            keep * state.test_scores[j] + d * support
        })
        .collect();

    let tests_for_codes = match config.sweep {
        SweepOrder::TestsFirst => &new_tests,
        SweepOrder::Simultaneous => &state.test_scores,
    };
    let new_codes: Vec<f64> = matrix
        .rows()
        .zip(&state.code_scores)
        .map(|(row, &prev)| {
            let support: f64 = row
                .iter()
                .zip(tests_for_codes)
                .filter(|(&p, _)| p)
                .map(|(_, s)| s)
                .sum();
            keep * prev + d * support
        })
        .collect();

    state.code_scores = new_codes;
    state.test_scores = new_tests;
    state.iteration += 1;
    Ok(())
}

/// Runs `config.iterations` sweeps from the all-ones state.
pub fn run_scoring(matrix: &LinkMatrix, config: &ScoringConfig) -> Result<ScoreState> {
    resume_scoring(matrix, ScoreState::initial(matrix), config)
}

/// Continues from a supplied state until `config.iterations` sweeps in total
/// have been applied.
pub fn resume_scoring(
    matrix: &LinkMatrix,
    mut state: ScoreState,
    config: &ScoringConfig,
) -> Result<ScoreState> {
    config.validate()?;
    state.check_dims(matrix)?;
    while state.iteration < config.iterations {
        step(matrix, &mut state, config)?;
    }
    Ok(state)
}

/// Every intermediate state, iterations `0..=config.iterations`.
pub fn trajectory(matrix: &LinkMatrix, config: &ScoringConfig) -> Result<Vec<ScoreState>> {
    config.validate()?;
    let mut state = ScoreState::initial(matrix);
    let mut out = Vec::with_capacity(config.iterations as usize + 1);
    out.push(state.clone());
    for _ in 0..config.iterations {
        step(matrix, &mut state, config)?;
        out.push(state.clone());
    }
    Ok(out)
}
