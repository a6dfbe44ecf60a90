//! Record types stored per stage. Each carries its problem id.

use mutval_core::strategies::ProblemMetrics;
use mutval_core::{
    ExecutionRecord, LinkMatrix, PreferencePair, Problem, ScoreState, Strategy, TimingSummary,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::genclient::SeedSnippet;

pub trait StageRecord: Serialize + DeserializeOwned {
    fn problem_id(&self) -> &str;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub problem_id: String,
    pub seed: SeedSnippet,
    /// Trusted tests shipped alongside the seed, used only by `eval`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle_tests: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRecord {
    pub problem: Problem,
    pub concepts: Vec<String>,
    pub n_blank_candidates: usize,
    pub n_discarded_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateRecord {
    pub problem_id: String,
    pub links: LinkMatrix,
    pub executions: Vec<ExecutionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub problem_id: String,
    pub state: ScoreState,
    /// Code indices, best first.
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRecord {
    pub problem_id: String,
    pub credible_tests: Vec<usize>,
    /// Empty when the credible set is empty.
    pub timings: Vec<TimingSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairsRecord {
    pub problem_id: String,
    pub pairs: Vec<PreferencePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub problem_id: String,
    pub accuracy: Vec<f64>,
    pub metrics: Vec<(Strategy, ProblemMetrics)>,
}

macro_rules! keyed {
    ($($t:ty => |$r:ident| $e:expr;)*) => {$(
        impl StageRecord for $t {
            fn problem_id(&self) -> &str {
                let $r = self;
                &$e
            }
        }
    )*};
}

keyed! {
    SeedRecord => |r| r.problem_id;
    GenerateRecord => |r| r.problem.problem_id;
    ValidateRecord => |r| r.problem_id;
    RankRecord => |r| r.problem_id;
    TimeRecord => |r| r.problem_id;
    PairsRecord => |r| r.problem_id;
    EvalRecord => |r| r.problem_id;
}
