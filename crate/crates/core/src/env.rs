//! Common interface of the simulated environments.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A simulator with a finite action set and a bucketed observation.
///
/// `act` advances the latent state by one event and returns the raw reward;
/// `observe` samples the agent's (possibly noisy) view of the current state.
pub trait Environment {
    fn n_actions(&self) -> usize;

    fn n_observations(&self) -> usize;

    /// Return to the start state. The event counter is not reset.
    fn reset(&mut self);

    fn act<R: Rng + ?Sized>(&mut self, action: usize, rng: &mut R) -> f64;

    fn observe<R: Rng + ?Sized>(&self, rng: &mut R) -> usize;

    /// Base events consumed since construction.
    fn events(&self) -> u64;

    /// Latent satisfaction of the current state.
    fn satisfaction(&self) -> f64;
}

/// One learner-visible transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvStep {
    pub observation: usize,
    pub reward: f64,
    /// Base events covered by this step; the bootstrap discount is `gamma^events_elapsed`.
    pub events_elapsed: u32,
}

impl EnvStep {
    pub fn bootstrap_discount(&self, gamma: f64) -> f64 {
        gamma.powi(self.events_elapsed as i32)
    }
}

/// One event followed by an observation of the resulting state.
pub fn base_step<E: Environment, R: Rng + ?Sized>(env: &mut E, action: usize, rng: &mut R) -> EnvStep {
    let reward = env.act(action, rng);
    EnvStep {
        observation: env.observe(rng),
        reward,
        events_elapsed: 1,
    }
}
