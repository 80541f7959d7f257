//! The Choc-Kale user-satisfaction simulator.
//!
//! Latent state is the net positive exposure `p`, a discounted running count
//! of Kale-minus-Choc recommendations. Satisfaction is `s(p) = sigmoid(tau * p)`
//! and engagement for action `a` is drawn from `N(s(p) * mu_a, sigma_a^2)`,
//! using the satisfaction *before* the exposure update.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Environment;
use crate::mdp::{FiniteMdp, MdpError};

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} = {value} is out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

fn check(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<(), ParamError> {
    if ok {
        Ok(())
    } else {
        Err(ParamError::OutOfRange { name, value, reason })
    }
}

/// Binary action set. `Choc` decreases exposure, `Kale` increases it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CkAction {
    Choc = 0,
    Kale = 1,
}

impl CkAction {
    pub const ALL: [CkAction; 2] = [CkAction::Choc, CkAction::Kale];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(CkAction::Choc),
            1 => Some(CkAction::Kale),
            _ => None,
        }
    }

    /// Exposure increment: +1 for Kale, -1 for Choc.
    pub fn exposure(self) -> f64 {
        match self {
            CkAction::Choc => -1.0,
            CkAction::Kale => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CkAction::Choc => "choc",
            CkAction::Kale => "kale",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CkParams {
    pub beta: f64,
    pub tau: f64,
    pub mu_choc: f64,
    pub mu_kale: f64,
    pub sigma_choc: f64,
    pub sigma_kale: f64,
    pub gamma: f64,
}

impl Default for CkParams {
    fn default() -> Self {
        Self {
            beta: 0.9,
            tau: 0.25,
            mu_choc: 8.0,
            mu_kale: 2.0,
            sigma_choc: 0.5,
            sigma_kale: 0.5,
            gamma: 0.95,
        }
    }
}

impl CkParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check((0.0..1.0).contains(&self.beta), "beta", self.beta, "must lie in [0, 1)")?;
        check(
            self.tau > 0.0 && self.tau.is_finite(),
            "tau",
            self.tau,
            "must be positive",
        )?;
        check(self.mu_kale > 0.0, "mu_kale", self.mu_kale, "must be positive")?;
        check(
            self.mu_choc > self.mu_kale && self.mu_choc.is_finite(),
            "mu_choc",
            self.mu_choc,
            "must exceed mu_kale",
        )?;
        check(
            self.sigma_choc >= 0.0,
            "sigma_choc",
            self.sigma_choc,
            "must be nonnegative",
        )?;
        check(
            self.sigma_kale >= 0.0,
            "sigma_kale",
            self.sigma_kale,
            "must be nonnegative",
        )?;
        check(
            (0.0..1.0).contains(&self.gamma),
            "gamma",
            self.gamma,
            "must lie in [0, 1)",
        )?;
        Ok(())
    }

    /// Upper end of the exposure range, `1 / (1 - beta)`.
    pub fn p_bound(&self) -> f64 {
        1.0 / (1.0 - self.beta)
    }

    pub fn mean_engagement(&self, action: CkAction) -> f64 {
        match action {
            CkAction::Choc => self.mu_choc,
            CkAction::Kale => self.mu_kale,
        }
    }

    pub fn engagement_std(&self, action: CkAction) -> f64 {
        match action {
            CkAction::Choc => self.sigma_choc,
            CkAction::Kale => self.sigma_kale,
        }
    }

    /// Same parameters with engagement noise switched off.
    pub fn noiseless(mut self) -> Self {
        self.sigma_choc = 0.0;
        self.sigma_kale = 0.0;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkState {
    pub p: f64,
}

impl CkState {
    pub fn satisfaction(&self, params: &CkParams) -> f64 {
        satisfaction(self.p, params.tau)
    }
}

/// How the agent sees satisfaction: corrupted by truncated Gaussian noise,
/// clamped to `[0, 1]` and bucketed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    pub sigma_n: f64,
    pub n_buckets: usize,
}

impl Default for ObservationModel {
    fn default() -> Self {
        Self {
            sigma_n: 0.0,
            n_buckets: 50,
        }
    }
}

impl ObservationModel {
    pub fn new(sigma_n: f64, n_buckets: usize) -> Result<Self, ParamError> {
        let model = Self { sigma_n, n_buckets };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        check(
            self.sigma_n >= 0.0 && self.sigma_n.is_finite(),
            "sigma_n",
            self.sigma_n,
            "must be nonnegative",
        )?;
        check(
            self.n_buckets >= 2,
            "n_buckets",
            self.n_buckets as f64,
            "need at least 2 buckets",
        )
    }

    /// Bucket holding a (possibly corrupted) satisfaction value.
    pub fn bucket(&self, s: f64) -> usize {
        let s = s.clamp(0.0, 1.0);
        ((s * self.n_buckets as f64).floor() as usize).min(self.n_buckets - 1)
    }

    /// Satisfaction at the centre of a bucket.
    pub fn bucket_center(&self, bucket: usize) -> f64 {
        (bucket as f64 + 0.5) / self.n_buckets as f64
    }

    pub fn observe<R: Rng + ?Sized>(&self, satisfaction: f64, rng: &mut R) -> usize {
        let noise = truncated_normal(0.0, self.sigma_n, -1.0, 1.0, rng);
        self.bucket(satisfaction + noise)
    }
}

pub fn satisfaction(p: f64, tau: f64) -> f64 {
    1.0 / (1.0 + (-tau * p).exp())
}

/// Inverse of [`satisfaction`].
pub fn exposure_for(s: f64, tau: f64) -> f64 {
    (s / (1.0 - s)).ln() / tau
}

/// Sample `N(mean, std^2)` restricted to `[lo, hi]` by rejection.
///
/// `mean` must lie in `[lo, hi]`; a zero `std` returns `mean`.
pub fn truncated_normal<R: Rng + ?Sized>(mean: f64, std: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        return mean;
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let x = mean + std * z;
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
}

/// Draw from `N(mean, std^2)`; zero `std` is exact.
pub(crate) fn normal<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        mean
    } else {
        let z: f64 = StandardNormal.sample(rng);
        mean + std * z
    }
}

/// Apply one recommendation. Returns the next state and the sampled engagement.
pub fn step<R: Rng + ?Sized>(state: CkState, action: CkAction, params: &CkParams, rng: &mut R) -> (CkState, f64) {
    let s = state.satisfaction(params);
    let reward = normal(s * params.mean_engagement(action), params.engagement_std(action), rng);
    let bound = params.p_bound();
    let next = CkState {
        p: (params.beta * state.p + action.exposure()).clamp(-bound, bound),
    };
    (next, reward)
}

/// Noisy bucketed view of the current satisfaction.
pub fn observe<R: Rng + ?Sized>(state: CkState, model: &ObservationModel, params: &CkParams, rng: &mut R) -> usize {
    model.observe(state.satisfaction(params), rng)
}

/// Uniform grid over the exposure range with `n` points.
pub fn exposure_grid(params: &CkParams, n: usize) -> Vec<f64> {
    let bound = params.p_bound();
    let step = 2.0 * bound / (n - 1) as f64;
    (0..n).map(|i| -bound + step * i as f64).collect()
}

/// Index of the grid point nearest `p`.
pub fn nearest_grid_index(params: &CkParams, n: usize, p: f64) -> usize {
    let bound = params.p_bound();
    let step = 2.0 * bound / (n - 1) as f64;
    (((p + bound) / step).round().max(0.0) as usize).min(n - 1)
}

/// Deterministic grid MDP of the exposure dynamics with expected engagement
/// as reward. State `i` is the `i`-th point of [`exposure_grid`].
pub fn build_discrete_mdp(params: &CkParams, n_buckets: usize) -> Result<FiniteMdp, MdpError> {
    if n_buckets < 2 {
        return Err(MdpError::Shape(format!("need at least 2 grid points, got {n_buckets}")));
    }
    let grid = exposure_grid(params, n_buckets);
    let transition = grid
        .iter()
        .map(|&p| {
            CkAction::ALL
                .iter()
                .map(|a| {
                    let mut row = vec![0.0; n_buckets];
                    row[nearest_grid_index(params, n_buckets, params.beta * p + a.exposure())] = 1.0;
                    row
                })
                .collect()
        })
        .collect();
    let reward = grid
        .iter()
        .map(|&p| {
            let s = satisfaction(p, params.tau);
            CkAction::ALL.iter().map(|&a| s * params.mean_engagement(a)).collect()
        })
        .collect();
    FiniteMdp::new(params.gamma, transition, reward)
}

/// Stateful Choc-Kale environment with a noisy bucketed observation.
#[derive(Debug, Clone)]
pub struct CkEnv {
    pub params: CkParams,
    pub observation: ObservationModel,
    state: CkState,
    events: u64,
}

impl CkEnv {
    pub fn new(params: CkParams, observation: ObservationModel) -> Self {
        Self {
            params,
            observation,
            state: CkState { p: 0.0 },
            events: 0,
        }
    }

    pub fn state(&self) -> CkState {
        self.state
    }

    pub fn set_state(&mut self, state: CkState) {
        self.state = state;
    }
}

impl Environment for CkEnv {
    fn n_actions(&self) -> usize {
        2
    }

    fn n_observations(&self) -> usize {
        self.observation.n_buckets
    }

    fn reset(&mut self) {
        self.state = CkState { p: 0.0 };
    }

    fn act<R: Rng + ?Sized>(&mut self, action: usize, rng: &mut R) -> f64 {
        let action = CkAction::from_index(action).expect("Choc-Kale has two actions");
        let (next, reward) = step(self.state, action, &self.params, rng);
        self.state = next;
        self.events += 1;
        reward
    }

    fn observe<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        observe(self.state, &self.observation, &self.params, rng)
    }

    fn events(&self) -> u64 {
        self.events
    }

    fn satisfaction(&self) -> f64 {
        self.state.satisfaction(&self.params)
    }
}
