use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// One programming task with its sampled candidates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub problem_id: String,
    pub prompt: String,
    pub codes: Vec<String>,
    pub tests: Vec<String>,
    /// Where the seed came from, typically a corpus-relative path.
    #[serde(default)]
    pub provenance: Option<String>,
    /// Trusted tests used only for ranking evaluation, never for scoring.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle_tests: Vec<String>,
}
