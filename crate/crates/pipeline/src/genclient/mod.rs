//! Chat-completion client for concept extraction, task writing, candidate
//! sampling and assertion generation.

pub mod decontam;
pub mod prompts;
mod seed;
mod transport;

use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use seed::{load_seed_corpus, SeedSnippet};
pub use transport::{
    parse_chat_response, ChatMessage, ChatRequest, FixtureRule, FixtureTransport, HttpTransport,
    Transport, TransportError,
};

pub const DEFAULT_SAMPLES: u32 = 15;
pub const DEFAULT_TEMPERATURE: f64 = 1.5;
pub const MIN_CANDIDATES: usize = 2;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("generation failed after {attempts} attempt(s): {source}")]
    Transport {
        attempts: u32,
        source: TransportError,
    },
    #[error("no concepts in completion")]
    EmptyConcepts,
    #[error("empty task instruction")]
    EmptyInstruction,
    #[error("only {found} usable candidate(s), need {needed}")]
    InsufficientCandidates { needed: usize, found: usize },
    #[error("no assertion lines in any completion")]
    NoTests,
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 4,
            initial_backoff_ms: 500,
            max_backoff_ms: 8000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): doubling, capped.
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64
            .checked_shl(retry.saturating_sub(1))
            .unwrap_or(u64::MAX);
        let ms = self
            .initial_backoff_ms
            .saturating_mul(factor)
            .min(self.max_backoff_ms.max(self.initial_backoff_ms));
        Duration::from_millis(ms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub endpoint: String,
    pub model_name: String,
    pub n_samples: u32,
    pub temperature: f64,
    pub max_concurrent: usize,
    pub request_timeout_ms: u64,
    pub retry: RetryPolicy,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model_name: String::new(),
            n_samples: DEFAULT_SAMPLES,
            temperature: DEFAULT_TEMPERATURE,
            max_concurrent: 4,
            request_timeout_ms: 120_000,
            retry: RetryPolicy::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n_samples == 0 {
            return Err(GenError::Invalid("n_samples must be at least 1".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(GenError::Invalid(
                "temperature must be a non-negative number".into(),
            ));
        }
        if self.max_concurrent == 0 {
            return Err(GenError::Invalid(
                "max_concurrent must be at least 1".into(),
            ));
        }
        if self.retry.max_attempts == 0 {
            return Err(GenError::Invalid(
                "retry.max_attempts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Candidate programs plus how many completions were blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidates {
    pub codes: Vec<String>,
    pub n_blank: usize,
}

/// Assertion lines plus how many other non-blank lines were dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedTests {
    pub tests: Vec<String>,
    pub n_discarded: usize,
}

struct Semaphore {
    permits: Mutex<usize>,
    freed: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Self {
            permits: Mutex::new(n),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut p = self.permits.lock().unwrap_or_else(|e| e.into_inner());
        while *p == 0 {
            p = self.freed.wait(p).unwrap_or_else(|e| e.into_inner());
        }
        *p -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

/// Shareable across threads; at most `max_concurrent` requests are in
/// flight at once.
pub struct GenClient {
    transport: Arc<dyn Transport>,
    config: GenerationConfig,
    gate: Semaphore,
}

impl GenClient {
    pub fn new(transport: Arc<dyn Transport>, config: GenerationConfig) -> Result<Self, GenError> {
        config.validate()?;
        Ok(Self {
            gate: Semaphore::new(config.max_concurrent),
            transport,
            config,
        })
    }

    pub fn config(&self) -> &GenerationConfig {
        &self.config
    }

    fn request(&self, prompt: String, n: u32, temperature: f64) -> Result<Vec<String>, GenError> {
        let req = ChatRequest {
            model: self.config.model_name.clone(),
            messages: vec![ChatMessage::user(prompt)],
            n,
            temperature,
        };
        let policy = self.config.retry;
        let mut attempt = 0;
        loop {
            attempt += 1;
            let result = {
                let _permit = self.gate.acquire();
                self.transport.complete(&req)
            };
            match result {
                Ok(choices) => return Ok(choices),
                Err(e) if e.retryable && attempt < policy.max_attempts => {
                    log::warn!("completion attempt {attempt} failed: {e}");
                    thread::sleep(policy.backoff(attempt));
                }
                Err(source) => {
                    return Err(GenError::Transport {
                        attempts: attempt,
                        source,
                    })
                }
            }
        }
    }

    pub fn extract_concepts(&self, seed: &SeedSnippet) -> Result<Vec<String>, GenError> {
        if seed.snippet.trim().is_empty() {
            return Err(GenError::Invalid("empty seed snippet".into()));
        }
        let choices = self.request(prompts::concept_prompt(&seed.snippet), 1, 0.0)?;
        let concepts = parse_concepts(choices.first().map_or("", String::as_str));
        if concepts.is_empty() {
            return Err(GenError::EmptyConcepts);
        }
        Ok(concepts)
    }

    pub fn generate_task(&self, concepts: &[String], language: &str) -> Result<String, GenError> {
        if concepts.is_empty() {
            return Err(GenError::Invalid("concept list is empty".into()));
        }
        let choices = self.request(prompts::task_prompt(concepts, language), 1, 0.0)?;
        let task = choices.first().map_or("", |s| s.trim());
        if task.is_empty() {
            return Err(GenError::EmptyInstruction);
        }
        Ok(task.to_owned())
    }

    pub fn generate_candidates(&self, instruction: &str) -> Result<Candidates, GenError> {
        if instruction.trim().is_empty() {
            return Err(GenError::Invalid("empty instruction".into()));
        }
        let choices = self.request(
            prompts::code_prompt(instruction),
            self.config.n_samples,
            self.config.temperature,
        )?;
        let mut codes = Vec::with_capacity(choices.len());
        let mut n_blank =
            self.config.n_samples as usize - choices.len().min(self.config.n_samples as usize);
        for c in &choices {
            let code = extract_code(c);
            if code.trim().is_empty() {
                n_blank += 1;
            } else {
                codes.push(code.to_owned());
            }
        }
        if codes.len() < MIN_CANDIDATES {
            return Err(GenError::InsufficientCandidates {
                needed: MIN_CANDIDATES,
                found: codes.len(),
            });
        }
        Ok(Candidates { codes, n_blank })
    }

    pub fn generate_tests(&self, instruction: &str) -> Result<GeneratedTests, GenError> {
        if instruction.trim().is_empty() {
            return Err(GenError::Invalid("empty instruction".into()));
        }
        let choices = self.request(
            prompts::test_prompt(instruction),
            self.config.n_samples,
            self.config.temperature,
        )?;
        let mut out = GeneratedTests {
            tests: Vec::new(),
            n_discarded: 0,
        };
        for c in &choices {
            let filtered = filter_assertions(c);
            out.tests.extend(filtered.tests);
            out.n_discarded += filtered.n_discarded;
        }
        if out.tests.is_empty() {
            return Err(GenError::NoTests);
        }
        Ok(out)
    }
}

/// Splits a comma (or newline) separated list, trimming and dropping
/// repeats while keeping first-seen order.
pub fn parse_concepts(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for part in text.split([',', '\n']) {
        let c = part.trim();
        if !c.is_empty() && !out.iter().any(|o| o == c) {
            out.push(c.to_owned());
        }
    }
    out
}

/// Body of the last fenced block, byte for byte, or the whole completion
/// when it has no fence. An unclosed final fence runs to the end.
pub fn extract_code(completion: &str) -> &str {
    let mut last = None;
    let mut open: Option<usize> = None;
    let mut pos = 0;
    for line in completion.split_inclusive('\n') {
        if line.trim_start().starts_with("```") {
            match open.take() {
                Some(start) => last = Some((start, pos)),
                None => open = Some(pos + line.len()),
            }
        }
        pos += line.len();
    }
    if let Some(start) = open {
        last = Some((start, completion.len()));
    }
    match last {
        Some((s, e)) => &completion[s..e],
        None => completion,
    }
}

fn is_assertion(line: &str) -> bool {
    line.strip_prefix("assert")
        .is_some_and(|rest| rest.starts_with(|c: char| c.is_whitespace() || c == '('))
}

/// Keeps lines that start with the `assert` keyword.
pub fn filter_assertions(completion: &str) -> GeneratedTests {
    let mut tests = Vec::new();
    let mut n_discarded = 0;
    for line in completion.lines() {
        let l = line.trim();
        if l.is_empty() {
            continue;
        }
        if is_assertion(l) {
            tests.push(l.to_owned());
        } else {
            n_discarded += 1;
        }
    }
    GeneratedTests { tests, n_discarded }
}
