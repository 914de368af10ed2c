//! Experiment harness: datasets, configuration, Monte Carlo runs over
//! simulated chips, voltage/layout sweeps and sensitivity-profile studies.

pub mod config;
pub mod error;
pub mod idx;
pub mod output;
pub mod runner;
pub mod seeds;
pub mod selftest;
pub mod sweep;
pub mod synthetic;

pub use config::{ExperimentConfig, LoadedConfig};
pub use error::{HarnessError, Result};
pub use runner::{AccuracyStats, Experiment, RunResult};
