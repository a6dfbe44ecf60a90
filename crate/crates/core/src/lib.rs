//! Ranking of generated code candidates by mutual execution-based
//! verification against generated tests, and selection of preference pairs
//! from the resulting scores and timings.
//!
//! Everything here is pure and deterministic. The crate builds without
//! `std` (it needs `alloc`); disable default features to use it that way.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
mod error;
pub mod execution;
pub mod matrix;
pub mod metrics;
pub mod pairs;
pub mod planted;
mod problem;
pub mod ranking;
pub mod scoring;
pub mod strategies;
pub mod timing;

pub use error::{Error, Result};
pub use execution::{ExecutionLimits, ExecutionRecord, ExecutionStatus};
pub use matrix::LinkMatrix;
pub use pairs::{
    ConfigSnapshot, PairMeta, PairThresholds, PairType, PreferencePair, SpeedupReport,
};
pub use planted::{GroundTruth, PlantedGraphSpec};
pub use problem::Problem;
pub use ranking::{rank_candidates, Ranking};
pub use scoring::{run_scoring, ScoreState, ScoringConfig, SweepOrder};
pub use strategies::Strategy;
pub use timing::TimingSummary;
