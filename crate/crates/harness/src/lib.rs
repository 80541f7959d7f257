//! Experiment runner for advantage amplification: noise sweeps, Q-value
//! panels, bound calculators and the verification suite behind the
//! `advamp` binary.

pub mod cli;
pub mod config;
pub mod qvalues;
pub mod seeds;
pub mod sweep;
pub mod verify;

pub use config::{EnvKind, ExperimentConfig, Overrides};
pub use sweep::MetricRow;
