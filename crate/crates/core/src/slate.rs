//! Continuous-kaleness slate environment.
//!
//! Items carry a kaleness score `v` in `[0, 1]`. Each event a slate is drawn
//! around the score of the previously consumed item, the agent picks a target
//! score `theta`, and the user consumes item `i` with probability
//! proportional to `exp(-|v_i - theta| / lambda)`. The consumed item moves
//! exposure by `2v - 1` and pays engagement with mean `s(p) * mu(v)`, where
//! `mu` interpolates linearly between the Choc (`v = 0`) and Kale (`v = 1`)
//! endpoints.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::choc_kale::{self, normal, truncated_normal, CkParams, ObservationModel, ParamError};
use crate::env::Environment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlateParams {
    pub n_items: usize,
    pub lambda: f64,
    pub item_std: f64,
    pub targets: Vec<f64>,
    pub ck: CkParams,
}

impl Default for SlateParams {
    fn default() -> Self {
        Self {
            n_items: 7,
            lambda: 0.2,
            item_std: 0.3,
            targets: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            ck: CkParams::default(),
        }
    }
}

impl SlateParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let bad = |name, value, reason| Err(ParamError::OutOfRange { name, value, reason });
        if self.n_items == 0 {
            return bad("n_items", 0.0, "need at least one item");
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda", self.lambda, "must be positive");
        }
        if !(self.item_std >= 0.0 && self.item_std.is_finite()) {
            return bad("item_std", self.item_std, "must be nonnegative");
        }
        if self.targets.is_empty() {
            return bad("targets", 0.0, "need at least one target");
        }
        for (i, &t) in self.targets.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) {
                return bad("targets", t, "targets must lie in [0, 1]");
            }
            if i > 0 && t <= self.targets[i - 1] {
                return bad("targets", t, "targets must be strictly increasing");
            }
        }
        self.ck.validate()
    }

    /// Mean engagement scale of an item with kaleness `v`.
    pub fn mean_engagement(&self, v: f64) -> f64 {
        v * self.ck.mu_kale + (1.0 - v) * self.ck.mu_choc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlateState {
    pub p: f64,
    pub last_kaleness: f64,
}

impl SlateState {
    /// Start state: neutral exposure, previous item at mid kaleness.
    pub fn initial() -> Self {
        Self {
            p: 0.0,
            last_kaleness: 0.5,
        }
    }

    pub fn satisfaction(&self, params: &SlateParams) -> f64 {
        choc_kale::satisfaction(self.p, params.ck.tau)
    }
}

pub fn draw_slate<R: Rng + ?Sized>(state: &SlateState, params: &SlateParams, rng: &mut R) -> Vec<f64> {
    (0..params.n_items)
        .map(|_| truncated_normal(state.last_kaleness, params.item_std, 0.0, 1.0, rng))
        .collect()
}

/// Choice probabilities `P(i) ∝ exp(-|v_i - theta| / lambda)`.
pub fn choice_probabilities(slate: &[f64], theta: f64, lambda: f64) -> Vec<f64> {
    let logits: Vec<f64> = slate.iter().map(|v| -(v - theta).abs() / lambda).collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

pub fn user_choice<R: Rng + ?Sized>(slate: &[f64], theta: f64, lambda: f64, rng: &mut R) -> usize {
    assert!(!slate.is_empty(), "slate must be nonempty");
    let probs = choice_probabilities(slate, theta, lambda);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    slate.len() - 1
}

/// Outcome of consuming an item with kaleness `v` at state `state`.
pub fn consume<R: Rng + ?Sized>(state: SlateState, v: f64, params: &SlateParams, rng: &mut R) -> (SlateState, f64) {
    let s = state.satisfaction(params);
    let reward = normal(s * params.mean_engagement(v), params.ck.sigma_kale, rng);
    let bound = params.ck.p_bound();
    let next = SlateState {
        p: (params.ck.beta * state.p + 2.0 * v - 1.0).clamp(-bound, bound),
        last_kaleness: v,
    };
    (next, reward)
}

pub fn step<R: Rng + ?Sized>(
    state: SlateState,
    theta_index: usize,
    params: &SlateParams,
    rng: &mut R,
) -> (SlateState, f64) {
    let theta = params.targets[theta_index];
    let slate = draw_slate(&state, params, rng);
    let chosen = user_choice(&slate, theta, params.lambda, rng);
    consume(state, slate[chosen], params, rng)
}

pub fn observe<R: Rng + ?Sized>(
    state: &SlateState,
    model: &ObservationModel,
    params: &SlateParams,
    rng: &mut R,
) -> usize {
    model.observe(state.satisfaction(params), rng)
}

#[derive(Debug, Clone)]
pub struct SlateEnv {
    pub params: SlateParams,
    pub observation: ObservationModel,
    state: SlateState,
    events: u64,
}

impl SlateEnv {
    pub fn new(params: SlateParams, observation: ObservationModel) -> Self {
        Self {
            params,
            observation,
            state: SlateState::initial(),
            events: 0,
        }
    }

    pub fn state(&self) -> SlateState {
        self.state
    }

    pub fn set_state(&mut self, state: SlateState) {
        self.state = state;
    }
}

impl Environment for SlateEnv {
    fn n_actions(&self) -> usize {
        self.params.targets.len()
    }

    fn n_observations(&self) -> usize {
        self.observation.n_buckets
    }

    fn reset(&mut self) {
        self.state = SlateState::initial();
    }

    fn act<R: Rng + ?Sized>(&mut self, action: usize, rng: &mut R) -> f64 {
        let (next, reward) = step(self.state, action, &self.params, rng);
        self.state = next;
        self.events += 1;
        reward
    }

    fn observe<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        observe(&self.state, &self.observation, &self.params, rng)
    }

    fn events(&self) -> u64 {
        self.events
    }

    fn satisfaction(&self) -> f64 {
        self.state.satisfaction(&self.params)
    }
}
