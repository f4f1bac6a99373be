//! Config-driven experiment runner for amortized fair reranking.

pub mod config;
pub mod experiment;

pub use config::ExperimentConfig;
pub use experiment::{compare, run, run_observed, CurveTable, ExperimentRun, Summary};
