//! Finite-MDP tools, recommender simulators, temporal-abstraction wrappers,
//! tabular Q-learning and closed-form bounds for advantage amplification.

pub mod analysis;
pub mod choc_kale;
pub mod env;
pub mod mdp;
pub mod qlearn;
pub mod slate;
pub mod temporal;

pub use env::{EnvStep, Environment};
pub use mdp::{FiniteMdp, MdpError, QTable};
pub use temporal::Wrapper;
