//! Explicit tabular MDPs and their exact solvers.
//!
//! The types here are the ground-truth substrate for everything else in the
//! crate: the Choc-Kale grid MDP, its k-step aggregation, its switching-cost
//! extension on (state, previous action), and the counterfactual Q-value
//! identity are all evaluated exactly on a [`FiniteMdp`].
//!
//! Transitions are stored densely, row-major over `(state, action, next)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default convergence tolerance for the exact solvers.
pub const DEFAULT_TOL: f64 = 1e-8;

const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("MDP must have at least one state and one action (got {n_states} states, {n_actions} actions)")]
    Empty { n_states: usize, n_actions: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("transition row (state {state}, action {action}) is not a distribution (sum={sum}, min={min})")]
    InvalidDistribution {
        state: usize,
        action: usize,
        sum: f64,
        min: f64,
    },

    #[error("reward at (state {state}, action {action}) is not finite")]
    NonFiniteReward { state: usize, action: usize },

    #[error("discount must lie in [0, 1), got {0}")]
    InvalidDiscount(f64),

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("aggregation horizon must be at least 1")]
    ZeroHorizon,

    #[error("advantages need at least two actions, got {0}")]
    TooFewActions(usize),

    #[error("switching cost must be nonnegative and finite, got {0}")]
    InvalidSwitchCost(f64),

    #[error("policy covers {got} states but MDP has {expected}")]
    PolicyShape { expected: usize, got: usize },

    #[error("policy chooses action {action} at state {state}, but only {n_actions} actions exist")]
    PolicyAction {
        state: usize,
        action: usize,
        n_actions: usize,
    },

    #[error("state {state} out of range for {n_states} states")]
    StateOutOfRange { state: usize, n_states: usize },

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MdpError>;

/// A finite, fully specified MDP with expected rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    transition: Vec<f64>,
    reward: Vec<f64>,
}

/// On-disk JSON layout of a [`FiniteMdp`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpDocument {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    /// `transition[s][a][s']`
    pub transition: Vec<Vec<Vec<f64>>>,
    /// `reward[s][a]`
    pub reward: Vec<Vec<f64>>,
}

impl FiniteMdp {
    /// Build from nested `transition[s][a][s']` and `reward[s][a]` tables.
    pub fn new(gamma: f64, transition: Vec<Vec<Vec<f64>>>, reward: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = transition.len();
        let n_actions = transition.first().map_or(0, Vec::len);
        if reward.len() != n_states {
            return Err(MdpError::Shape(format!(
                "reward has {} rows, transition has {}",
                reward.len(),
                n_states
            )));
        }
        let mut flat_t = Vec::with_capacity(n_states * n_actions * n_states);
        let mut flat_r = Vec::with_capacity(n_states * n_actions);
        for (s, (t_row, r_row)) in transition.iter().zip(&reward).enumerate() {
            if t_row.len() != n_actions || r_row.len() != n_actions {
                return Err(MdpError::Shape(format!(
                    "state {s} has {} transition rows and {} rewards, expected {n_actions}",
                    t_row.len(),
                    r_row.len()
                )));
            }
            for dist in t_row {
                if dist.len() != n_states {
                    return Err(MdpError::Shape(format!(
                        "state {s}: distribution of length {} over {n_states} states",
                        dist.len()
                    )));
                }
                flat_t.extend_from_slice(dist);
            }
            flat_r.extend_from_slice(r_row);
        }
        Self::from_flat(n_states, n_actions, gamma, flat_t, flat_r)
    }

    /// Build from flat row-major tables: `transition[(s * n_actions + a) * n_states + s']`
    /// and `reward[s * n_actions + a]`.
    pub fn from_flat(
        n_states: usize,
        n_actions: usize,
        gamma: f64,
        transition: Vec<f64>,
        reward: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(MdpError::Empty { n_states, n_actions });
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(MdpError::InvalidDiscount(gamma));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(MdpError::Shape(format!(
                "flat transition has {} entries, expected {}",
                transition.len(),
                n_states * n_actions * n_states
            )));
        }
        if reward.len() != n_states * n_actions {
            return Err(MdpError::Shape(format!(
                "flat reward has {} entries, expected {}",
                reward.len(),
                n_states * n_actions
            )));
        }
        for s in 0..n_states {
            for a in 0..n_actions {
                let row = &transition[(s * n_actions + a) * n_states..][..n_states];
                let sum: f64 = row.iter().sum();
                let min = row.iter().copied().fold(f64::INFINITY, f64::min);
                if !(sum - 1.0).abs().le(&PROB_SUM_TOL) || min < 0.0 || !min.is_finite() {
                    return Err(MdpError::InvalidDistribution {
                        state: s,
                        action: a,
                        sum,
                        min,
                    });
                }
                if !reward[s * n_actions + a].is_finite() {
                    return Err(MdpError::NonFiniteReward { state: s, action: a });
                }
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            gamma,
            transition,
            reward,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Distribution over next states after taking `action` in `state`.
    pub fn transition_row(&self, state: usize, action: usize) -> &[f64] {
        let start = (state * self.n_actions + action) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    pub fn transition(&self, state: usize, action: usize, next: usize) -> f64 {
        self.transition_row(state, action)[next]
    }

    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.reward[state * self.n_actions + action]
    }

    /// Largest absolute expected reward.
    pub fn r_max(&self) -> f64 {
        self.reward.iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    pub fn to_document(&self) -> MdpDocument {
        MdpDocument {
            n_states: self.n_states,
            n_actions: self.n_actions,
            gamma: self.gamma,
            transition: (0..self.n_states)
                .map(|s| {
                    (0..self.n_actions)
                        .map(|a| self.transition_row(s, a).to_vec())
                        .collect()
                })
                .collect(),
            reward: (0..self.n_states)
                .map(|s| (0..self.n_actions).map(|a| self.reward(s, a)).collect())
                .collect(),
        }
    }

    pub fn from_document(doc: MdpDocument) -> Result<Self> {
        let mdp = Self::new(doc.gamma, doc.transition, doc.reward)?;
        if mdp.n_states != doc.n_states || mdp.n_actions != doc.n_actions {
            return Err(MdpError::Shape(format!(
                "header declares {}x{}, tables are {}x{}",
                doc.n_states, doc.n_actions, mdp.n_states, mdp.n_actions
            )));
        }
        Ok(mdp)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("MDP document is always serializable")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(json)?)
    }

    fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.n_states {
            return Err(MdpError::StateOutOfRange {
                state,
                n_states: self.n_states,
            });
        }
        Ok(())
    }

    fn check_policy(&self, policy: &DeterministicPolicy) -> Result<()> {
        if policy.action_of.len() != self.n_states {
            return Err(MdpError::PolicyShape {
                expected: self.n_states,
                got: policy.action_of.len(),
            });
        }
        if let Some((state, &action)) = policy.action_of.iter().enumerate().find(|(_, &a)| a >= self.n_actions) {
            return Err(MdpError::PolicyAction {
                state,
                action,
                n_actions: self.n_actions,
            });
        }
        Ok(())
    }

    fn expect(&self, state: usize, action: usize, values: &[f64]) -> f64 {
        self.transition_row(state, action)
            .iter()
            .zip(values)
            .filter(|(p, _)| **p != 0.0)
            .map(|(p, v)| p * v)
            .sum()
    }

    /// One Bellman optimality backup of `q`.
    pub fn bellman_optimality(&self, q: &QTable) -> QTable {
        let v: Vec<f64> = (0..self.n_states).map(|s| q.max_value(s)).collect();
        self.backup_with(&v)
    }

    /// One policy-evaluation backup of `q` under `policy`.
    pub fn bellman_policy(&self, q: &QTable, policy: &DeterministicPolicy) -> QTable {
        let v: Vec<f64> = (0..self.n_states).map(|s| q.get(s, policy.action(s))).collect();
        self.backup_with(&v)
    }

    fn backup_with(&self, v: &[f64]) -> QTable {
        let mut out = QTable::zeros(self.n_states, self.n_actions);
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                out.set(s, a, self.reward(s, a) + self.gamma * self.expect(s, a, v));
            }
        }
        out
    }
}

/// A state x action table of real values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self::filled(n_states, n_actions, 0.0)
    }

    pub fn filled(n_states: usize, n_actions: usize, value: f64) -> Self {
        Self {
            n_states,
            n_actions,
            values: vec![value; n_states * n_actions],
        }
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_actions = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_actions) {
            return Err(MdpError::Shape("ragged Q-table rows".into()));
        }
        Ok(Self {
            n_states: rows.len(),
            n_actions,
            values: rows.concat(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    #[inline]
    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.n_actions + action] = value;
    }

    #[inline]
    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n_actions.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn max_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action at `state`, lowest index on ties.
    pub fn argmax(&self, state: usize) -> usize {
        argmax_lowest(self.row(state))
    }

    /// Max-norm distance to another table of the same shape.
    pub fn max_abs_diff(&self, other: &QTable) -> f64 {
        assert_eq!(
            (self.n_states, self.n_actions),
            (other.n_states, other.n_actions),
            "Q-table shapes differ"
        );
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> QTable {
        QTable {
            n_states: self.n_states,
            n_actions: self.n_actions,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

pub(crate) fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicPolicy {
    action_of: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(action_of: Vec<usize>) -> Self {
        Self { action_of }
    }

    /// The same action everywhere.
    pub fn constant(n_states: usize, action: usize) -> Self {
        Self {
            action_of: vec![action; n_states],
        }
    }

    #[inline]
    pub fn action(&self, state: usize) -> usize {
        self.action_of[state]
    }

    pub fn actions(&self) -> &[usize] {
        &self.action_of
    }

    pub fn n_states(&self) -> usize {
        self.action_of.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateAdvantage {
    pub best: usize,
    pub second: usize,
    pub advantage: f64,
}

/// Per-state best action, runner-up and the gap between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageProfile {
    pub states: Vec<StateAdvantage>,
}

impl AdvantageProfile {
    pub fn advantage(&self, state: usize) -> f64 {
        self.states[state].advantage
    }

    pub fn values(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.advantage).collect()
    }

    pub fn max(&self) -> f64 {
        self.states.iter().fold(0.0_f64, |m, s| m.max(s.advantage))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(MdpError::InvalidTolerance(tol));
    }
    Ok(())
}

/// Iterate `backup` from zero until successive iterates differ by at most
/// `tol * (1 - gamma)`. The result then has Bellman residual <= `gamma * tol`
/// and lies within `tol` of the fixed point.
fn iterate_to_fixpoint(mdp: &FiniteMdp, tol: f64, backup: impl Fn(&QTable) -> QTable) -> QTable {
    let stop = (tol * (1.0 - mdp.gamma)).max(f64::MIN_POSITIVE);
    let mut q = QTable::zeros(mdp.n_states, mdp.n_actions);
    loop {
        let next = backup(&q);
        let diff = next.max_abs_diff(&q);
        q = next;
        if diff <= stop {
            return q;
        }
    }
}

/// Optimal Q-function by value iteration.
pub fn solve_q_star(mdp: &FiniteMdp, tol: f64) -> Result<QTable> {
    check_tol(tol)?;
    Ok(iterate_to_fixpoint(mdp, tol, |q| mdp.bellman_optimality(q)))
}

/// Q-function of a deterministic policy by iterative evaluation.
pub fn policy_q(mdp: &FiniteMdp, policy: &DeterministicPolicy, tol: f64) -> Result<QTable> {
    check_tol(tol)?;
    mdp.check_policy(policy)?;
    Ok(iterate_to_fixpoint(mdp, tol, |q| mdp.bellman_policy(q, policy)))
}

/// Value of `policy` at every state, read off its Q-function.
pub fn policy_values(mdp: &FiniteMdp, policy: &DeterministicPolicy, tol: f64) -> Result<Vec<f64>> {
    let q = policy_q(mdp, policy, tol)?;
    Ok((0..mdp.n_states).map(|s| q.get(s, policy.action(s))).collect())
}

pub fn greedy(q: &QTable) -> DeterministicPolicy {
    DeterministicPolicy::new((0..q.n_states()).map(|s| q.argmax(s)).collect())
}

pub fn advantages(q: &QTable) -> Result<AdvantageProfile> {
    if q.n_actions() < 2 {
        return Err(MdpError::TooFewActions(q.n_actions()));
    }
    let states = (0..q.n_states())
        .map(|s| {
            let row = q.row(s);
            let best = argmax_lowest(row);
            let mut second = if best == 0 { 1 } else { 0 };
            for (a, &v) in row.iter().enumerate() {
                if a != best && v > row[second] {
                    second = a;
                }
            }
            StateAdvantage {
                best,
                second,
                advantage: row[best] - row[second],
            }
        })
        .collect();
    Ok(AdvantageProfile { states })
}

/// The k-repetition reparameterization: every action is held for `k`
/// consecutive events. Rewards are discounted within the block and the
/// discount becomes `gamma^k`.
pub fn aggregate_mdp(mdp: &FiniteMdp, k: usize) -> Result<FiniteMdp> {
    if k == 0 {
        return Err(MdpError::ZeroHorizon);
    }
    let n = mdp.n_states;
    let na = mdp.n_actions;
    let mut transition = vec![0.0; n * na * n];
    let mut reward = vec![0.0; n * na];
    for a in 0..na {
        // dist[s] = distribution after i repetitions of a from s
        let mut dist: Vec<Vec<f64>> = (0..n)
            .map(|s| {
                let mut e = vec![0.0; n];
                e[s] = 1.0;
                e
            })
            .collect();
        let mut acc = vec![0.0; n];
        let mut disc = 1.0;
        for _ in 0..k {
            for s in 0..n {
                let expected_r: f64 = dist[s]
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p != 0.0)
                    .map(|(j, p)| p * mdp.reward(j, a))
                    .sum();
                acc[s] += disc * expected_r;
                let mut next = vec![0.0; n];
                for (j, &pj) in dist[s].iter().enumerate() {
                    if pj == 0.0 {
                        continue;
                    }
                    for (nj, &t) in mdp.transition_row(j, a).iter().enumerate() {
                        next[nj] += pj * t;
                    }
                }
                dist[s] = next;
            }
            disc *= mdp.gamma;
        }
        for s in 0..n {
            reward[s * na + a] = acc[s];
            transition[(s * na + a) * n..][..n].copy_from_slice(&dist[s]);
        }
    }
    FiniteMdp::from_flat(n, na, mdp.gamma.powi(k as i32), transition, reward)
}

/// An MDP over (base state, previous action) pairs with a switching penalty.
#[derive(Debug, Clone)]
pub struct SwitchingCostMdp {
    pub mdp: FiniteMdp,
    n_base_states: usize,
    n_base_actions: usize,
    switch_cost: f64,
}

impl SwitchingCostMdp {
    /// Index of the extended state `(base, prev_action)`.
    pub fn extended_index(&self, base: usize, prev_action: usize) -> usize {
        base * self.n_base_actions + prev_action
    }

    pub fn base_state(&self, extended: usize) -> usize {
        extended / self.n_base_actions
    }

    pub fn prev_action(&self, extended: usize) -> usize {
        extended % self.n_base_actions
    }

    pub fn n_base_states(&self) -> usize {
        self.n_base_states
    }

    pub fn n_base_actions(&self) -> usize {
        self.n_base_actions
    }

    pub fn switch_cost(&self) -> f64 {
        self.switch_cost
    }
}

pub fn switching_cost_mdp(mdp: &FiniteMdp, switch_cost: f64) -> Result<SwitchingCostMdp> {
    if !(switch_cost >= 0.0 && switch_cost.is_finite()) {
        return Err(MdpError::InvalidSwitchCost(switch_cost));
    }
    let nb = mdp.n_states;
    let na = mdp.n_actions;
    let n = nb * na;
    let mut transition = vec![0.0; n * na * n];
    let mut reward = vec![0.0; n * na];
    for b in 0..nb {
        for prev in 0..na {
            let x = b * na + prev;
            for a in 0..na {
                let penalty = if a != prev { switch_cost } else { 0.0 };
                reward[x * na + a] = mdp.reward(b, a) - penalty;
                let row = &mut transition[(x * na + a) * n..][..n];
                for (nb_next, &p) in mdp.transition_row(b, a).iter().enumerate() {
                    row[nb_next * na + a] = p;
                }
            }
        }
    }
    Ok(SwitchingCostMdp {
        mdp: FiniteMdp::from_flat(n, na, mdp.gamma, transition, reward)?,
        n_base_states: nb,
        n_base_actions: na,
        switch_cost,
    })
}

/// Both sides of the counterfactual Q-value identity at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterfactualGap {
    /// `V^pi(b) - V^rho(b)`
    pub lhs: f64,
    /// Discounted expected per-step regret of `rho` against `Q^pi`, along `rho`'s trajectories.
    pub rhs: f64,
}

impl CounterfactualGap {
    pub fn error(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Smallest horizon whose truncated tail `gamma^h * span / (1 - gamma)` is at most `tol`.
pub fn tail_horizon(gamma: f64, span: f64, tol: f64) -> usize {
    if gamma == 0.0 || span == 0.0 {
        return 1;
    }
    let h = ((tol * (1.0 - gamma) / span).ln() / gamma.ln()).ceil();
    h.max(1.0) as usize
}

/// Evaluate both sides of `V^pi(b) - V^rho(b) = E_rho[sum_i gamma^i (Q^pi(b_i, pi(b_i)) - Q^pi(b_i, rho(b_i)))]`.
///
/// The right-hand side propagates the exact state distribution under `rho`
/// for `horizon` steps.
pub fn counterfactual_gap(
    mdp: &FiniteMdp,
    pi: &DeterministicPolicy,
    rho: &DeterministicPolicy,
    state: usize,
    horizon: usize,
    tol: f64,
) -> Result<CounterfactualGap> {
    mdp.check_state(state)?;
    let q_pi = policy_q(mdp, pi, tol)?;
    let q_rho = policy_q(mdp, rho, tol)?;
    let lhs = q_pi.get(state, pi.action(state)) - q_rho.get(state, rho.action(state));

    let regret: Vec<f64> = (0..mdp.n_states)
        .map(|s| q_pi.get(s, pi.action(s)) - q_pi.get(s, rho.action(s)))
        .collect();
    let mut dist = vec![0.0; mdp.n_states];
    dist[state] = 1.0;
    let mut rhs = 0.0;
    let mut disc = 1.0;
    for _ in 0..horizon {
        rhs += disc * dist.iter().zip(&regret).map(|(p, r)| p * r).sum::<f64>();
        let mut next = vec![0.0; mdp.n_states];
        for (s, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (s2, &t) in mdp.transition_row(s, rho.action(s)).iter().enumerate() {
                next[s2] += p * t;
            }
        }
        dist = next;
        disc *= mdp.gamma;
    }
    Ok(CounterfactualGap { lhs, rhs })
}

/// Empirical smoothness constant: the largest change of any action's
/// Q-value across any positive-probability transition.
pub fn smoothness(mdp: &FiniteMdp, q: &QTable) -> Result<f64> {
    if q.n_states() != mdp.n_states || q.n_actions() != mdp.n_actions {
        return Err(MdpError::Shape(format!(
            "Q-table is {}x{}, MDP is {}x{}",
            q.n_states(),
            q.n_actions(),
            mdp.n_states,
            mdp.n_actions
        )));
    }
    let mut l = 0.0_f64;
    for s in 0..mdp.n_states {
        // successor sets are shared across actions in many MDPs; dedupe per state
        let mut succ = vec![false; mdp.n_states];
        for a in 0..mdp.n_actions {
            for (s2, &p) in mdp.transition_row(s, a).iter().enumerate() {
                if p > 0.0 {
                    succ[s2] = true;
                }
            }
        }
        for (s2, _) in succ.iter().enumerate().filter(|(_, &hit)| hit) {
            for a in 0..mdp.n_actions {
                l = l.max((q.get(s, a) - q.get(s2, a)).abs());
            }
        }
    }
    Ok(l)
}

/// Signal-to-noise ratio of a Q-function.
///
/// Returns `f64::INFINITY` when no state's advantage falls under the error
/// threshold `2 * epsilon * r_max / (1 - gamma)^2` (or all such states have
/// zero advantage while some advantage is positive). When every advantage is
/// zero the ratio is taken to be 0.
pub fn snr(q: &QTable, epsilon: f64, r_max: f64, gamma: f64) -> Result<f64> {
    let profile = advantages(q)?;
    let threshold = 2.0 * epsilon * r_max / (1.0 - gamma).powi(2);
    let top = profile.max();
    let small = profile
        .states
        .iter()
        .filter(|s| s.advantage <= threshold)
        .fold(0.0_f64, |m, s| m.max(s.advantage));
    if top == 0.0 {
        return Ok(0.0);
    }
    if small == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(top / small - 1.0)
}
