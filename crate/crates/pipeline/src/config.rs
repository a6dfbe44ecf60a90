//! Pipeline configuration, loaded from TOML.
//!
//! ```toml
//! repetitions = 5
//! parallelism = 4
//!
//! [scoring]
//! damping = 0.85
//! iterations = 10
//!
//! [limits]
//! time_limit_ms = 5000
//!
//! [pairs]
//! delta = 0.1
//! gamma = 0.1
//!
//! [generation]
//! endpoint = "http://localhost:8000/v1/chat/completions"
//! model_name = "my-model"
//!
//! [paths]
//! runs_dir = "runs"
//! harness = ["python3", "-m", "harness"]
//! ```

use std::path::{Path, PathBuf};

use mutval_core::timing::DEFAULT_REPETITIONS;
use mutval_core::{ExecutionLimits, PairThresholds, ScoringConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::genclient::GenerationConfig;

pub const ENV_ENDPOINT: &str = "GEN_ENDPOINT";
pub const ENV_API_KEY: &str = "GEN_API_KEY";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub runs_dir: PathBuf,
    pub out_dir: PathBuf,
    pub corpus_dir: PathBuf,
    /// File extension of seed files.
    pub seed_ext: String,
    /// Command that speaks the harness protocol on stdin/stdout.
    pub harness: Vec<String>,
    /// Optional benchmark text for the 10-gram contamination screen.
    pub decontam_file: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            runs_dir: "runs".into(),
            out_dir: "out".into(),
            corpus_dir: "corpus".into(),
            seed_ext: "py".into(),
            harness: vec!["python3".into(), "-m".into(), "harness".into()],
            decontam_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub scoring: ScoringConfig,
    pub limits: ExecutionLimits,
    pub generation: GenerationConfig,
    pub pairs: PairThresholds,
    pub repetitions: u32,
    pub parallelism: usize,
    /// Problems handled per stage batch; the manifest is saved after each.
    pub batch_size: usize,
    pub paths: Paths,
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            scoring: ScoringConfig::default(),
            limits: ExecutionLimits::default(),
            generation: GenerationConfig::default(),
            pairs: PairThresholds::default(),
            repetitions: DEFAULT_REPETITIONS,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            batch_size: 16,
            paths: Paths::default(),
            api_key: None,
        }
    }
}

/// The part of the configuration that changes results. Endpoint, key,
/// parallelism, retry policy and paths are left out.
#[derive(Serialize)]
struct Fingerprinted<'a> {
    scoring: &'a ScoringConfig,
    limits: &'a ExecutionLimits,
    pairs: &'a PairThresholds,
    repetitions: u32,
    model_name: &'a str,
    n_samples: u32,
    temperature: f64,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Applies `GEN_ENDPOINT` and `GEN_API_KEY` from `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(ep) = lookup(ENV_ENDPOINT).filter(|s| !s.is_empty()) {
            self.generation.endpoint = ep;
        }
        if let Some(key) = lookup(ENV_API_KEY).filter(|s| !s.is_empty()) {
            self.api_key = Some(key);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.scoring.validate().map_err(|e| inv(&e))?;
        self.limits.validate().map_err(|e| inv(&e))?;
        self.pairs.validate().map_err(|e| inv(&e))?;
        self.generation.validate().map_err(|e| inv(&e))?;
        if self.repetitions == 0 {
            return Err(ConfigError::Invalid(
                "repetitions must be at least 1".into(),
            ));
        }
        if self.parallelism == 0 {
            return Err(ConfigError::Invalid(
                "parallelism must be at least 1".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(ConfigError::Invalid("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the result-affecting settings.
    pub fn fingerprint(&self) -> String {
        let view = Fingerprinted {
            scoring: &self.scoring,
            limits: &self.limits,
            pairs: &self.pairs,
            repetitions: self.repetitions,
            model_name: &self.generation.model_name,
            n_samples: self.generation.n_samples,
            temperature: self.generation.temperature,
        };
        let json = serde_json::to_string(&view).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
