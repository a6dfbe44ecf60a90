//! Std-side pipeline: execution, generation, storage and the CLI.

pub mod cli;
pub mod config;
pub mod datastore;
pub mod executor;
pub mod export;
pub mod genclient;
pub mod pipeline;
