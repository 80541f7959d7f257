//! Trajectory-level temporal abstraction: fixed-k action repetition and a
//! switching penalty on top of any [`Environment`].

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{base_step, EnvStep, Environment};

#[derive(Debug, Error, PartialEq)]
pub enum WrapperError {
    #[error("repetition horizon must be at least 1")]
    ZeroHorizon,
    #[error("switching cost must be nonnegative and finite, got {0}")]
    InvalidSwitchCost(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateConfig {
    pub k: u32,
}

impl AggregateConfig {
    pub fn new(k: u32) -> Result<Self, WrapperError> {
        if k == 0 {
            return Err(WrapperError::ZeroHorizon);
        }
        Ok(Self { k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchConfig {
    #[serde(rename = "T")]
    pub cost: f64,
}

impl SwitchConfig {
    pub fn new(cost: f64) -> Result<Self, WrapperError> {
        if !(cost >= 0.0 && cost.is_finite()) {
            return Err(WrapperError::InvalidSwitchCost(cost));
        }
        Ok(Self { cost })
    }
}

/// How the learner interacts with the base environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Wrapper {
    None,
    Aggregate {
        k: u32,
    },
    Switch {
        #[serde(rename = "T")]
        cost: f64,
    },
}

impl Wrapper {
    pub fn validate(&self) -> Result<(), WrapperError> {
        match *self {
            Wrapper::None => Ok(()),
            Wrapper::Aggregate { k } => AggregateConfig::new(k).map(|_| ()),
            Wrapper::Switch { cost } => SwitchConfig::new(cost).map(|_| ()),
        }
    }

    /// Events executed per decision.
    pub fn repeat(&self) -> u32 {
        match *self {
            Wrapper::Aggregate { k } => k,
            _ => 1,
        }
    }

    /// Stable short label, e.g. `none`, `k5`, `T2`.
    pub fn label(&self) -> String {
        match *self {
            Wrapper::None => "none".to_string(),
            Wrapper::Aggregate { k } => format!("k{k}"),
            Wrapper::Switch { cost } => format!("T{cost}"),
        }
    }
}

/// Hold `action` for `k` events; the reward is discounted within the block
/// and the observation is taken after the last event.
pub fn aggregate_step<E: Environment, R: Rng + ?Sized>(
    env: &mut E,
    action: usize,
    k: u32,
    gamma: f64,
    rng: &mut R,
) -> EnvStep {
    assert!(k >= 1, "aggregation horizon must be at least 1");
    let mut reward = 0.0;
    let mut disc = 1.0;
    for _ in 1..k {
        reward += disc * env.act(action, rng);
        disc *= gamma;
    }
    let last = base_step(env, action, rng);
    EnvStep {
        observation: last.observation,
        reward: reward + disc * last.reward,
        events_elapsed: k,
    }
}

/// Observation index of the pair (bucket, previous action).
pub fn extended_observation(bucket: usize, prev_action: usize, n_actions: usize) -> usize {
    bucket * n_actions + prev_action
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchStep {
    /// Penalized reward and the extended observation `(bucket, action)`.
    pub step: EnvStep,
    pub raw_reward: f64,
    pub switched: bool,
}

/// One event with a penalty `cost` charged iff `action != prev_action`.
pub fn switch_step<E: Environment, R: Rng + ?Sized>(
    env: &mut E,
    action: usize,
    prev_action: usize,
    cost: f64,
    rng: &mut R,
) -> SwitchStep {
    let n_actions = env.n_actions();
    let base = base_step(env, action, rng);
    let switched = action != prev_action;
    let penalty = if switched { cost } else { 0.0 };
    SwitchStep {
        step: EnvStep {
            observation: extended_observation(base.observation, action, n_actions),
            reward: base.reward - penalty,
            events_elapsed: 1,
        },
        raw_reward: base.reward,
        switched,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub raw_reward: f64,
    pub switched: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnDecomposition {
    pub raw_return: f64,
    pub penalty_paid: f64,
}

impl ReturnDecomposition {
    pub fn penalized(&self) -> f64 {
        self.raw_return - self.penalty_paid
    }
}

/// Split a switching-cost trajectory into its raw discounted return and the
/// discounted fictitious penalty.
pub fn penalized_return_decomposition(trajectory: &[SwitchRecord], gamma: f64, cost: f64) -> ReturnDecomposition {
    let mut raw_return = 0.0;
    let mut penalty_paid = 0.0;
    let mut disc = 1.0;
    for rec in trajectory {
        raw_return += disc * rec.raw_reward;
        if rec.switched {
            penalty_paid += disc * cost;
        }
        disc *= gamma;
    }
    ReturnDecomposition {
        raw_return,
        penalty_paid,
    }
}

/// Switch flags for an action sequence; the first action never counts as a switch.
pub fn switch_flags(actions: &[usize]) -> Vec<bool> {
    actions
        .iter()
        .enumerate()
        .map(|(t, &a)| t > 0 && a != actions[t - 1])
        .collect()
}
