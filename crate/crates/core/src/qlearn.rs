//! Tabular Q-learning on bucketed observations with a uniform-random
//! behaviour policy, plus Monte Carlo evaluation of the greedy policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{base_step, EnvStep, Environment};
use crate::mdp::{greedy, DeterministicPolicy, QTable};
use crate::temporal::{aggregate_step, extended_observation, switch_step, Wrapper, WrapperError};

/// Observation spaces larger than this are treated as continuous.
pub const MAX_OBSERVATIONS: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum QLearnError {
    #[error("observation space of size {0} is not a finite bucketed space")]
    ContinuousObservations(usize),
    #[error("{name} = {value} is invalid: {reason}")]
    Config {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(transparent)]
    Wrapper(#[from] WrapperError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QLearnConfig {
    /// Budget in base events.
    pub n_events: u64,
    pub alpha0: f64,
    pub alpha_decay: f64,
    pub gamma: f64,
    pub init_q: f64,
    pub seed: u64,
}

impl Default for QLearnConfig {
    fn default() -> Self {
        Self {
            n_events: 30_000,
            alpha0: 1.0,
            alpha_decay: 0.6,
            gamma: 0.95,
            init_q: 0.0,
            seed: 0,
        }
    }
}

impl QLearnConfig {
    pub fn validate(&self) -> Result<(), QLearnError> {
        let bad = |name, value, reason| Err(QLearnError::Config { name, value, reason });
        if self.n_events == 0 {
            return bad("n_events", 0.0, "must be positive");
        }
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            return bad("alpha0", self.alpha0, "must lie in (0, 1]");
        }
        if !(self.alpha_decay >= 0.0 && self.alpha_decay.is_finite()) {
            return bad("alpha_decay", self.alpha_decay, "must be nonnegative");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", self.gamma, "must lie in [0, 1)");
        }
        if !self.init_q.is_finite() {
            return bad("init_q", self.init_q, "must be finite");
        }
        Ok(())
    }

    /// Step size after `visits` earlier updates of the same entry.
    pub fn learning_rate(&self, visits: u64) -> f64 {
        self.alpha0 / (1.0 + visits as f64).powf(self.alpha_decay)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingStats {
    pub learner_steps: u64,
    pub base_events: u64,
    /// Update count per `(observation, action)`, row-major.
    pub visits: Vec<u64>,
    /// Every update used a bootstrap discount of `gamma^events_elapsed`
    /// with `events_elapsed` equal to the wrapper's repetition count.
    pub discount_audit_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPolicy {
    pub q: QTable,
    pub policy: DeterministicPolicy,
    pub wrapper: Wrapper,
    pub config: QLearnConfig,
    /// Buckets of the underlying environment (before any `(bucket, prev_action)` extension).
    pub n_buckets: usize,
    pub n_actions: usize,
    pub stats: TrainingStats,
}

impl TrainedPolicy {
    /// Greedy action for a bucket; under a switching cost the previous action
    /// is part of the state. With no previous action the first choice is made
    /// as if the chosen action had been the previous one.
    pub fn act(&self, bucket: usize, prev_action: Option<usize>) -> usize {
        match self.wrapper {
            Wrapper::Switch { .. } => match prev_action {
                Some(prev) => self.policy.action(extended_observation(bucket, prev, self.n_actions)),
                None => {
                    let row: Vec<f64> = (0..self.n_actions)
                        .map(|a| self.q.get(extended_observation(bucket, a, self.n_actions), a))
                        .collect();
                    crate::mdp::argmax_lowest(&row)
                }
            },
            _ => self.policy.action(bucket),
        }
    }

    /// Q-values of each action at a bucket, read with `prev_action = action`
    /// under a switching cost.
    pub fn bucket_values(&self, bucket: usize) -> Vec<f64> {
        match self.wrapper {
            Wrapper::Switch { .. } => (0..self.n_actions)
                .map(|a| self.q.get(extended_observation(bucket, a, self.n_actions), a))
                .collect(),
            _ => self.q.row(bucket).to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trained policy is always serializable")
    }

    pub fn from_json(json: &str) -> serde_json::Result<Self> {
        serde_json::from_str(json)
    }
}

/// One Q-learning update. The bootstrap discount is derived from the step's
/// own event count, so aggregated steps always bootstrap with `gamma^k`.
pub fn td_update(
    q: &mut QTable,
    visits: &mut [u64],
    state: usize,
    action: usize,
    step: &EnvStep,
    config: &QLearnConfig,
) {
    let idx = state * q.n_actions() + action;
    let alpha = config.learning_rate(visits[idx]);
    let target = step.reward + step.bootstrap_discount(config.gamma) * q.max_value(step.observation);
    let old = q.get(state, action);
    q.set(state, action, old + alpha * (target - old));
    visits[idx] += 1;
}

/// Train a tabular Q-function from one continuous uniform-random trajectory
/// that starts at the environment's reset state and runs until at least
/// `config.n_events` base events have been consumed.
pub fn train<E: Environment>(
    env: &mut E,
    wrapper: Wrapper,
    config: &QLearnConfig,
) -> Result<TrainedPolicy, QLearnError> {
    config.validate()?;
    wrapper.validate()?;
    let n_buckets = env.n_observations();
    if n_buckets == 0 || n_buckets > MAX_OBSERVATIONS {
        return Err(QLearnError::ContinuousObservations(n_buckets));
    }
    let n_actions = env.n_actions();
    let n_states = match wrapper {
        Wrapper::Switch { .. } => n_buckets * n_actions,
        _ => n_buckets,
    };
    let mut q = QTable::filled(n_states, n_actions, config.init_q);
    let mut visits = vec![0_u64; n_states * n_actions];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    env.reset();
    let start_events = env.events();
    let bucket = env.observe(&mut rng);
    let mut prev_action = rng.random_range(0..n_actions);
    let mut state = match wrapper {
        Wrapper::Switch { .. } => extended_observation(bucket, prev_action, n_actions),
        _ => bucket,
    };
    let expected_elapsed = wrapper.repeat();
    let mut audit_ok = true;
    let mut learner_steps = 0_u64;
    let mut first = true;

    while env.events() - start_events < config.n_events {
        let action = if first && matches!(wrapper, Wrapper::Switch { .. }) {
            prev_action
        } else {
            rng.random_range(0..n_actions)
        };
        first = false;
        let step = match wrapper {
            Wrapper::None => base_step(env, action, &mut rng),
            Wrapper::Aggregate { k } => aggregate_step(env, action, k, config.gamma, &mut rng),
            Wrapper::Switch { cost } => switch_step(env, action, prev_action, cost, &mut rng).step,
        };
        audit_ok &= step.events_elapsed == expected_elapsed;
        td_update(&mut q, &mut visits, state, action, &step, config);
        learner_steps += 1;
        state = step.observation;
        prev_action = action;
    }

    Ok(TrainedPolicy {
        policy: greedy(&q),
        q,
        wrapper,
        config: *config,
        n_buckets,
        n_actions,
        stats: TrainingStats {
            learner_steps,
            base_events: env.events() - start_events,
            visits,
            discount_audit_ok: audit_ok,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub mean: f64,
    /// Sample standard deviation of `returns` over `sqrt(n)`.
    pub std_error: f64,
    pub returns: Vec<f64>,
}

impl EvalResult {
    pub fn from_returns(returns: Vec<f64>) -> Self {
        let (mean, std_error) = mean_and_std_error(&returns);
        Self {
            mean,
            std_error,
            returns,
        }
    }
}

pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Discounted raw return of one rollout of `horizon` base events. The policy
/// decides from a fresh observation every `wrapper.repeat()` events; switching
/// penalties are not charged.
pub fn rollout<E: Environment, R: Rng + ?Sized>(
    env: &mut E,
    policy: &TrainedPolicy,
    horizon: u64,
    gamma: f64,
    rng: &mut R,
) -> f64 {
    let repeat = policy.wrapper.repeat() as u64;
    let mut t = 0;
    let mut disc = 1.0;
    let mut ret = 0.0;
    let mut prev = None;
    while t < horizon {
        let bucket = env.observe(rng);
        let action = policy.act(bucket, prev);
        for _ in 0..repeat.min(horizon - t) {
            ret += disc * env.act(action, rng);
            disc *= gamma;
            t += 1;
        }
        prev = Some(action);
    }
    ret
}

/// Mean discounted return over `n_rollouts` independent rollouts from the
/// reset state. Rollout `i` uses ChaCha stream `i` of `seed`.
pub fn evaluate<E: Environment + Clone>(
    env: &E,
    policy: &TrainedPolicy,
    n_rollouts: usize,
    horizon: u64,
    gamma: f64,
    seed: u64,
) -> EvalResult {
    assert!(horizon >= 1, "evaluation horizon must be at least 1");
    let returns = (0..n_rollouts)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut env = env.clone();
            env.reset();
            rollout(&mut env, policy, horizon, gamma, &mut rng)
        })
        .collect();
    EvalResult::from_returns(returns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// One bucket, constant reward for every action.
    #[derive(Clone)]
    struct Constant {
        reward: f64,
        n_actions: usize,
        events: u64,
    }

    impl Environment for Constant {
        fn n_actions(&self) -> usize {
            self.n_actions
        }
        fn n_observations(&self) -> usize {
            1
        }
        fn reset(&mut self) {}
        fn act<R: Rng + ?Sized>(&mut self, _action: usize, _rng: &mut R) -> f64 {
            self.events += 1;
            self.reward
        }
        fn observe<R: Rng + ?Sized>(&self, _rng: &mut R) -> usize {
            0
        }
        fn events(&self) -> u64 {
            self.events
        }
        fn satisfaction(&self) -> f64 {
            0.5
        }
    }

    #[test]
    fn converges_to_geometric_value() {
        let mut env = Constant {
            reward: 1.0,
            n_actions: 1,
            events: 0,
        };
        let config = QLearnConfig {
            n_events: 200_000,
            alpha_decay: 1.0,
            gamma: 0.5,
            ..QLearnConfig::default()
        };
        let trained = train(&mut env, Wrapper::None, &config).unwrap();
        assert_abs_diff_eq!(trained.q.get(0, 0), 2.0, epsilon = 0.01);
    }

    #[test]
    fn zero_reward_keeps_zero_table() {
        let mut env = Constant {
            reward: 0.0,
            n_actions: 2,
            events: 0,
        };
        let trained = train(&mut env, Wrapper::Aggregate { k: 3 }, &QLearnConfig::default()).unwrap();
        assert!(trained.q.rows().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn event_accounting() {
        for (wrapper, steps) in [
            (Wrapper::None, 30_000),
            (Wrapper::Aggregate { k: 5 }, 6_000),
            (Wrapper::Aggregate { k: 7 }, 4_286),
            (Wrapper::Switch { cost: 1.0 }, 30_000),
        ] {
            let mut env = Constant {
                reward: 1.0,
                n_actions: 2,
                events: 0,
            };
            let trained = train(&mut env, wrapper, &QLearnConfig::default()).unwrap();
            let s = &trained.stats;
            assert_eq!(s.learner_steps, steps, "{wrapper:?}");
            assert_eq!(s.visits.iter().sum::<u64>(), s.learner_steps);
            assert!(s.base_events >= 30_000 && s.base_events < 30_000 + wrapper.repeat() as u64);
            assert!(s.discount_audit_ok);
        }
    }

    #[test]
    fn td_update_uses_event_discount() {
        let mut q = QTable::from_rows(&[vec![0.0, 0.0], vec![10.0, 4.0]]).unwrap();
        let mut visits = vec![0; 4];
        let config = QLearnConfig {
            gamma: 0.9,
            ..QLearnConfig::default()
        };
        let step = EnvStep {
            observation: 1,
            reward: 1.0,
            events_elapsed: 3,
        };
        td_update(&mut q, &mut visits, 0, 1, &step, &config);
        // alpha = 1 on the first visit
        assert_abs_diff_eq!(q.get(0, 1), 1.0 + 0.729 * 10.0, epsilon = 1e-12);
        assert_eq!(visits, vec![0, 1, 0, 0]);
        assert_abs_diff_eq!(config.learning_rate(1), 2.0_f64.powf(-0.6), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut env = Constant {
            reward: 1.0,
            n_actions: 2,
            events: 0,
        };
        let bad = QLearnConfig {
            alpha0: 0.0,
            ..QLearnConfig::default()
        };
        assert!(train(&mut env, Wrapper::None, &bad).is_err());
        assert!(train(&mut env, Wrapper::Aggregate { k: 0 }, &QLearnConfig::default()).is_err());
    }

    #[test]
    fn evaluation_of_constant_reward() {
        let mut env = Constant {
            reward: 1.0,
            n_actions: 2,
            events: 0,
        };
        let trained = train(&mut env, Wrapper::None, &QLearnConfig::default()).unwrap();
        let res = evaluate(&env, &trained, 4, 1000, 0.95, 3);
        assert_abs_diff_eq!(res.mean, 20.0, epsilon = 0.95_f64.powi(1000) / 0.05 + 1e-9);
        assert_eq!(res.std_error, 0.0);
        let agg = TrainedPolicy {
            wrapper: Wrapper::Aggregate { k: 3 },
            ..trained
        };
        let res3 = evaluate(&env, &agg, 2, 1000, 0.95, 3);
        assert_abs_diff_eq!(res3.mean, res.mean, epsilon = 1e-12);
    }

    #[test]
    fn std_error_formula() {
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert_abs_diff_eq!(se, (5.0_f64 / 3.0).sqrt() / 2.0, epsilon = 1e-15);
    }
}
