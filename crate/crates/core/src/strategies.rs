//! Side-by-side evaluation of code-ranking strategies against ground truth.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{score_consensus_product, score_filter_all, score_pass_count};
use crate::error::{Error, Result};
use crate::matrix::LinkMatrix;
use crate::metrics::{kendall_tau, ndcg, spearman};
use crate::planted::GroundTruth;
use crate::scoring::{run_scoring, ScoringConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    SelfValidation,
    FilterAll,
    PassCount,
    ConsensusProduct,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::SelfValidation,
        Strategy::FilterAll,
        Strategy::PassCount,
        Strategy::ConsensusProduct,
        Strategy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::SelfValidation => "self_validation",
            Strategy::FilterAll => "filter_all",
            Strategy::PassCount => "pass_count",
            Strategy::ConsensusProduct => "consensus_product",
            Strategy::Random => "random",
        }
    }

    /// Per-code scores under this strategy; higher is better.
    ///
    /// `seed` only affects [`Strategy::Random`], which draws an independent
    /// uniform score per code.
    pub fn code_scores(
        self,
        matrix: &LinkMatrix,
        scoring: &ScoringConfig,
        seed: u64,
    ) -> Result<Vec<f64>> {
        Ok(match self {
            Strategy::SelfValidation => run_scoring(matrix, scoring)?.code_scores,
            Strategy::FilterAll => score_filter_all(matrix)
                .into_iter()
                .map(|b| if b { 1.0 } else { 0.0 })
                .collect(),
            Strategy::PassCount => score_pass_count(matrix)
                .into_iter()
                .map(|c| c as f64)
                .collect(),
            Strategy::ConsensusProduct => score_consensus_product(matrix)
                .into_iter()
                .map(|c| c as f64)
                .collect(),
            Strategy::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..matrix.n_codes()).map(|_| rng.random::<f64>()).collect()
            }
        })
    }
}

/// Mean per-problem metrics for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub mean_spearman: Option<f64>,
    pub mean_kendall: Option<f64>,
    pub mean_ndcg: Option<f64>,
    /// Problems where the rank correlations were defined.
    pub n_defined: usize,
    /// Problems excluded because a vector was constant.
    pub n_undefined: usize,
}

/// Metrics for one strategy on one problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemMetrics {
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
    pub ndcg: f64,
}

pub fn evaluate_scores(scores: &[f64], truth: &GroundTruth) -> Result<ProblemMetrics> {
    let defined = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedCorrelation) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(ProblemMetrics {
        spearman: defined(spearman(scores, truth.as_slice()))?,
        kendall: defined(kendall_tau(scores, truth.as_slice()))?,
        ndcg: ndcg(scores, truth.as_slice())?,
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Scores every instance under every strategy and averages the per-problem
/// metrics. Problem `k` uses `seed + k` for the random strategy.
pub fn compare_strategies(
    instances: &[(LinkMatrix, GroundTruth)],
    strategies: &[Strategy],
    scoring: &ScoringConfig,
    seed: u64,
) -> Result<Vec<StrategySummary>> {
    let mut out = Vec::with_capacity(strategies.len());
    for &strategy in strategies {
        let mut sp = Vec::new();
        let mut kt = Vec::new();
        let mut nd = Vec::new();
        let mut undefined = 0;
        for (k, (matrix, truth)) in instances.iter().enumerate() {
            if truth.len() != matrix.n_codes() {
                return Err(Error::DimensionMismatch {
                    what: "ground truth",
                    expected: matrix.n_codes(),
                    found: truth.len(),
                });
            }
            let scores = strategy.code_scores(matrix, scoring, seed.wrapping_add(k as u64))?;
            let m = evaluate_scores(&scores, truth)?;
            nd.push(m.ndcg);
            match (m.spearman, m.kendall) {
                (Some(s), Some(t)) => {
                    sp.push(s);
                    kt.push(t);
                }
                _ => undefined += 1,
            }
        }
        out.push(StrategySummary {
            strategy,
            mean_spearman: mean(&sp),
            mean_kendall: mean(&kt),
            mean_ndcg: mean(&nd),
            n_defined: sp.len(),
            n_undefined: undefined,
        });
    }
    Ok(out)
}
