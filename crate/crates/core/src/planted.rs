//! Synthetic link matrices with a known answer.
//!
//! Each code is correct with probability `p_correct_code` and each test is
//! valid with probability `p_valid_test`. A valid test is passed exactly by
//! the correct codes; an invalid test is passed by a fair coin flip per
//! code. Every link is then flipped independently with probability `noise`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::LinkMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedGraphSpec {
    pub n_codes: usize,
    pub n_tests: usize,
    pub p_correct_code: f64,
    pub p_valid_test: f64,
    pub noise: f64,
    pub rng_seed: u64,
}

impl PlantedGraphSpec {
    pub fn validate(&self) -> Result<()> {
        for p in [self.p_correct_code, self.p_valid_test, self.noise] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter("probabilities must lie in [0, 1]"));
            }
        }
        if self.n_codes == 0 || self.n_tests == 0 {
            return Err(Error::EmptyMatrix {
                n_codes: self.n_codes,
                n_tests: self.n_tests,
            });
        }
        Ok(())
    }
}

/// Per-code accuracy in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundTruth(pub Vec<f64>);

impl GroundTruth {
    /// Fraction of oracle tests passed by each code.
    pub fn from_oracle_matrix(oracle: &LinkMatrix) -> Self {
        let total = oracle.n_tests() as f64;
        Self(
            oracle
                .rows()
                .map(|row| row.iter().filter(|&&p| p).count() as f64 / total)
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Everything drawn while building one planted graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedGraph {
    /// Observed links, after noise.
    pub matrix: LinkMatrix,
    /// Links before noise.
    pub ideal: LinkMatrix,
    pub correct_codes: Vec<bool>,
    pub valid_tests: Vec<bool>,
    pub truth: GroundTruth,
}

pub fn planted_graph(spec: &PlantedGraphSpec) -> Result<(LinkMatrix, GroundTruth)> {
    let g = planted_graph_detailed(spec)?;
    Ok((g.matrix, g.truth))
}

pub fn planted_graph_detailed(spec: &PlantedGraphSpec) -> Result<PlantedGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let correct_codes: Vec<bool> = (0..spec.n_codes)
        .map(|_| rng.random_bool(spec.p_correct_code))
        .collect();
    let valid_tests: Vec<bool> = (0..spec.n_tests)
        .map(|_| rng.random_bool(spec.p_valid_test))
        .collect();

    let ideal = LinkMatrix::from_fn(spec.n_codes, spec.n_tests, |i, j| {
        if valid_tests[j] {
            correct_codes[i]
        } else {
            rng.random_bool(0.5)
        }
    })?;
    let matrix = LinkMatrix::from_fn(spec.n_codes, spec.n_tests, |i, j| {
        ideal.passes(i, j) ^ rng.random_bool(spec.noise)
    })?;
    let truth = GroundTruth(
        correct_codes
            .iter()
            .map(|&c| if c { 1.0 } else { 0.0 })
            .collect(),
    );
    Ok(PlantedGraph {
        matrix,
        ideal,
        correct_codes,
        valid_tests,
        truth,
    })
}
