//! Numerical checks of the amplification identities and bounds on concrete
//! MDPs. Each check records its measured statistic, the limit it is held to
//! and the slack between them; a check over an empty qualifying set passes
//! vacuously and says so.

use std::fmt;

use advamp_core::analysis::{
    aggregation_value_loss, amplified_advantage_lower, holding_regret, kappa, lambert_w, lossless_amplified_advantage,
    switching_advantage_threshold,
};
use advamp_core::choc_kale::{build_discrete_mdp, CkEnv, CkParams, ObservationModel};
use advamp_core::env::{base_step, Environment};
use advamp_core::mdp::{
    advantages, aggregate_mdp, counterfactual_gap, greedy, smoothness, solve_q_star, switching_cost_mdp, tail_horizon,
    DeterministicPolicy, FiniteMdp, QTable, DEFAULT_TOL,
};
use advamp_core::temporal::{aggregate_step, switch_step};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::seeds::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    /// Distance from the limit on the passing side; negative on failure.
    pub slack: f64,
    pub note: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        let slack = limit - measured;
        Self {
            name: name.into(),
            passed: slack >= 0.0,
            measured,
            limit,
            slack,
            note: None,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        let slack = measured - limit;
        Self {
            name: name.into(),
            passed: slack >= 0.0,
            measured,
            limit,
            slack,
            note: None,
        }
    }

    pub fn vacuous(name: impl Into<String>, limit: f64, why: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            measured: f64::NAN,
            limit,
            slack: f64::INFINITY,
            note: Some(format!("vacuous: {}", why.into())),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<40} measured {:>12.4e}  limit {:>12.4e}  slack {:>12.4e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.limit,
            self.slack
        )?;
        if let Some(note) = &self.note {
            write!(f, "  ({note})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        let failed = self.failures().len();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub ck: CkParams,
    pub n_buckets: usize,
    pub tol: f64,
}

impl VerifyOptions {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        Self {
            seed: config.seed,
            ck: config.ck,
            n_buckets: config.n_buckets,
            tol: DEFAULT_TOL,
        }
    }
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self::from_config(&ExperimentConfig::default())
    }
}

/// Random MDP with sparse random transition rows and rewards in `[-1, 1]`.
pub fn random_mdp<R: Rng + ?Sized>(n_states: usize, n_actions: usize, gamma: f64, rng: &mut R) -> FiniteMdp {
    let mut transition = vec![vec![vec![0.0; n_states]; n_actions]; n_states];
    let mut reward = vec![vec![0.0; n_actions]; n_states];
    for s in 0..n_states {
        for a in 0..n_actions {
            let row = &mut transition[s][a];
            for p in row.iter_mut() {
                if rng.random_bool(0.5) {
                    *p = rng.random::<f64>();
                }
            }
            row[rng.random_range(0..n_states)] += 0.1;
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= total);
            reward[s][a] = rng.random_range(-1.0..=1.0);
        }
    }
    FiniteMdp::new(gamma, transition, reward).expect("normalized rows")
}

/// Birth-death chain whose Q-values drift slowly across states. Action 0
/// pays a fixed immediate bonus and drifts down, action 1 drifts up toward
/// higher base reward.
pub fn drift_chain(n_states: usize, gamma: f64, slope: f64, bonus: f64, drift: f64) -> FiniteMdp {
    let mut transition = vec![vec![vec![0.0; n_states]; 2]; n_states];
    let mut reward = vec![vec![0.0; 2]; n_states];
    for s in 0..n_states {
        let up_state = (s + 1).min(n_states - 1);
        let down_state = s.saturating_sub(1);
        for a in 0..2 {
            let (up, down) = if a == 1 { (drift, 0.1) } else { (0.1, drift) };
            let row = &mut transition[s][a];
            row[up_state] += up;
            row[down_state] += down;
            row[s] += 1.0 - up - down;
            reward[s][a] = slope * s as f64 / n_states as f64 + if a == 0 { bonus } else { 0.0 };
        }
    }
    FiniteMdp::new(gamma, transition, reward).expect("valid chain")
}

/// The drift chain used by the non-vacuous bound checks.
pub fn reference_chain() -> FiniteMdp {
    drift_chain(30, 0.9, 0.3, 2.0, 0.3)
}

/// Switching costs at which the reference chain clears the switching-advantage threshold.
pub const CHAIN_SWITCH_COSTS: [f64; 3] = [0.01, 0.05, 0.1];

pub fn values(q: &QTable) -> Vec<f64> {
    (0..q.n_states()).map(|s| q.max_value(s)).collect()
}

/// Largest Bellman-optimality residual of `q`.
pub fn bellman_residual(mdp: &FiniteMdp, q: &QTable) -> f64 {
    mdp.bellman_optimality(q).max_abs_diff(q)
}

/// Largest `|lhs - rhs|` of the counterfactual identity over random MDPs,
/// random policy pairs and random start states.
pub fn counterfactual_max_error(seed: u64, n_mdps: usize, gamma: f64, tol: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n_mdps {
        let n_s = rng.random_range(2..=10);
        let n_a = rng.random_range(2..=4);
        let mdp = random_mdp(n_s, n_a, gamma, &mut rng);
        let pi = DeterministicPolicy::new((0..n_s).map(|_| rng.random_range(0..n_a)).collect());
        let rho = DeterministicPolicy::new((0..n_s).map(|_| rng.random_range(0..n_a)).collect());
        let start = rng.random_range(0..n_s);
        let span = 2.0 * mdp.r_max() / (1.0 - gamma);
        let horizon = tail_horizon(gamma, span, tol);
        let gap = counterfactual_gap(&mdp, &pi, &rho, start, horizon, tol).expect("valid inputs");
        worst = worst.max(gap.error());
    }
    worst
}

/// States from which every state reachable within `k - 1` steps of repeating
/// the greedy action shares that greedy action.
pub fn constant_greedy_states(mdp: &FiniteMdp, q: &QTable, k: usize) -> Vec<usize> {
    let pi = greedy(q);
    (0..mdp.n_states())
        .filter(|&b| {
            let a = pi.action(b);
            let mut frontier = vec![b];
            for _ in 0..k {
                if frontier.iter().any(|&s| pi.action(s) != a) {
                    return false;
                }
                let mut next: Vec<usize> = frontier
                    .iter()
                    .flat_map(|&s| {
                        mdp.transition_row(s, a)
                            .iter()
                            .enumerate()
                            .filter(|(_, &p)| p > 0.0)
                            .map(|(s2, _)| s2)
                    })
                    .collect();
                next.sort_unstable();
                next.dedup();
                frontier = next;
            }
            true
        })
        .collect()
}

/// Repetition value identity: at states whose greedy action stays constant
/// over the block, one aggregated backup of `V*` along the greedy action
/// returns `V*`.
pub fn repetition_check(name: &str, mdp: &FiniteMdp, k: usize, tol: f64) -> Check {
    let q = solve_q_star(mdp, tol).expect("valid mdp");
    let agg = aggregate_mdp(mdp, k).expect("k >= 1");
    let v = values(&q);
    let states = constant_greedy_states(mdp, &q, k);
    let limit = 2.0 * tol;
    if states.is_empty() {
        return Check::vacuous(name, limit, "no state keeps its greedy action for a full block");
    }
    let worst = states
        .iter()
        .map(|&b| {
            let a = q.argmax(b);
            let cont: f64 = agg.transition_row(b, a).iter().zip(&v).map(|(p, x)| p * x).sum();
            (agg.reward(b, a) + agg.gamma() * cont - v[b]).abs()
        })
        .fold(0.0, f64::max);
    Check::at_most(name, worst, limit).with_note(format!("{} qualifying states", states.len()))
}

/// Loss of the best k-repeating policy against the optimum, against the aggregation value-loss bound.
pub fn aggregation_loss_check(name: &str, mdp: &FiniteMdp, k: u32, tol: f64) -> Check {
    let q = solve_q_star(mdp, tol).expect("valid mdp");
    let qa = solve_q_star(&aggregate_mdp(mdp, k as usize).expect("k >= 1"), tol).expect("valid mdp");
    let l = smoothness(mdp, &q).expect("matching shapes");
    let bound = aggregation_value_loss(k, l, mdp.gamma());
    // slack is reported relative to the bound itself
    let worst_excess = (0..mdp.n_states())
        .map(|b| (q.max_value(b) - qa.max_value(b)).abs() - bound)
        .fold(f64::NEG_INFINITY, f64::max);
    Check::at_most(name, worst_excess, 2.0 * tol).with_note(format!("L = {l:.4}, bound = {bound:.4}"))
}

/// Aggregated advantage against its lower bound wherever `A(b) >= 2kL`.
pub fn amplified_advantage_check(name: &str, mdp: &FiniteMdp, k: u32, tol: f64) -> Check {
    let q = solve_q_star(mdp, tol).expect("valid mdp");
    let qa = solve_q_star(&aggregate_mdp(mdp, k as usize).expect("k >= 1"), tol).expect("valid mdp");
    let l = smoothness(mdp, &q).expect("matching shapes");
    let adv = advantages(&q).expect("at least two actions");
    let adv_agg = advantages(&qa).expect("at least two actions");
    let limit = -2.0 * tol;
    let margins: Vec<f64> = (0..mdp.n_states())
        .filter_map(|b| {
            let lower = amplified_advantage_lower(adv.advantage(b), k, l, mdp.gamma()).ok()?;
            Some(adv_agg.advantage(b) - lower)
        })
        .collect();
    if margins.is_empty() {
        return Check::vacuous(
            name,
            limit,
            format!("max advantage {:.4} < 2kL = {:.4}", adv.max(), 2.0 * k as f64 * l),
        );
    }
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Check::at_least(name, worst, limit).with_note(format!("{} qualifying states, L = {l:.4}", margins.len()))
}

/// Aggregated advantage against the event-level advantage wherever `A(b) >= 2kL`.
pub fn amplification_check(name: &str, mdp: &FiniteMdp, k: u32, tol: f64) -> Check {
    let q = solve_q_star(mdp, tol).expect("valid mdp");
    let qa = solve_q_star(&aggregate_mdp(mdp, k as usize).expect("k >= 1"), tol).expect("valid mdp");
    let l = smoothness(mdp, &q).expect("matching shapes");
    let adv = advantages(&q).expect("at least two actions");
    let adv_agg = advantages(&qa).expect("at least two actions");
    let threshold = 2.0 * k as f64 * l;
    let margins: Vec<f64> = (0..mdp.n_states())
        .filter(|&b| adv.advantage(b) >= threshold)
        .map(|b| adv_agg.advantage(b) - adv.advantage(b))
        .collect();
    let larger = (0..mdp.n_states())
        .filter(|&b| adv_agg.advantage(b) > adv.advantage(b))
        .count();
    let context = format!("aggregated advantage larger at {larger}/{} states", mdp.n_states());
    if margins.is_empty() {
        return Check::vacuous(name, 0.0, format!("no state has A >= 2kL = {threshold:.4}; {context}"));
    }
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Check::at_least(name, worst, 0.0).with_note(format!("{} qualifying states; {context}", margins.len()))
}

/// Extended-MDP advantage at `(b, a*)` against `2T` wherever the event-level
/// advantage clears the switching-advantage threshold.
pub fn switching_advantage_check(name: &str, mdp: &FiniteMdp, switch_cost: f64, tol: f64) -> Check {
    let q = solve_q_star(mdp, tol).expect("valid mdp");
    let l = smoothness(mdp, &q).expect("matching shapes");
    let adv = advantages(&q).expect("at least two actions");
    let limit = 2.0 * switch_cost - 2.0 * tol;
    let threshold = match switching_advantage_threshold(mdp.gamma(), l, switch_cost) {
        Ok(t) => t,
        Err(e) => return Check::vacuous(name, limit, format!("threshold undefined: {e}")),
    };
    let ext = switching_cost_mdp(mdp, switch_cost).expect("valid cost");
    let qe = solve_q_star(&ext.mdp, tol).expect("valid mdp");
    let gaps: Vec<f64> = (0..mdp.n_states())
        .filter(|&b| adv.advantage(b) >= threshold)
        .map(|b| {
            let best = q.argmax(b);
            let x = ext.extended_index(b, best);
            let other = (0..mdp.n_actions())
                .filter(|&a| a != best)
                .map(|a| qe.get(x, a))
                .fold(f64::NEG_INFINITY, f64::max);
            qe.get(x, best) - other
        })
        .collect();
    if gaps.is_empty() {
        return Check::vacuous(
            name,
            limit,
            format!("max advantage {:.4} < threshold {threshold:.4}", adv.max()),
        );
    }
    let worst = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    Check::at_least(name, worst, limit).with_note(format!("{} qualifying states, threshold {threshold:.4}", gaps.len()))
}

/// Largest `|lossless_amplified_advantage - amplified_advantage_lower - 2kL/(1-gamma)|` over a parameter grid.
pub fn amplification_identity_error() -> f64 {
    let mut worst = 0.0_f64;
    for &gamma in &[0.5, 0.9, 0.95, 0.99] {
        for k in 1..=8 {
            for &l in &[0.0, 0.01, 0.1, 0.5] {
                for &extra in &[0.0, 0.5, 3.0] {
                    let a = 2.0 * k as f64 * l + extra;
                    let lhs = lossless_amplified_advantage(a, k, l, gamma).expect("in scope")
                        - amplified_advantage_lower(a, k, l, gamma).expect("in scope");
                    let rhs = 2.0 * k as f64 * l / (1.0 - gamma);
                    worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
                }
            }
        }
    }
    worst
}

/// Bisection on `holding_regret(k) = T` over `k >= 0`.
pub fn kappa_by_bisection(gamma: f64, l: f64, t: f64) -> f64 {
    let f = |k: f64| holding_regret(k, gamma, l) - t;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub const KAPPA_GRID: ([f64; 3], [f64; 3], [f64; 3]) = ([0.9, 0.95, 0.99], [0.05, 0.1, 0.5], [0.1, 1.0, 3.0]);

pub fn kappa_max_error() -> f64 {
    let (gammas, ls, ts) = KAPPA_GRID;
    let mut worst = 0.0_f64;
    for &g in &gammas {
        for &l in &ls {
            for &t in &ts {
                let closed = kappa(g, l, t).expect("grid lies in the domain");
                worst = worst.max((closed - kappa_by_bisection(g, l, t)).abs());
            }
        }
    }
    worst
}

/// Log-spaced points from just above the branch point to `1e6`.
pub fn lambert_grid() -> Vec<f64> {
    let lo = -1.0 / std::f64::consts::E;
    let mut xs: Vec<f64> = (0..=40)
        .map(|i| lo + 10f64.powf(-6.0 + 6.5 * i as f64 / 40.0))
        .collect();
    xs.extend((0..=40).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 40.0)));
    xs.push(0.0);
    xs
}

/// Largest relative residual `|w e^w - x| / max(1, |x|)` over the grid.
pub fn lambert_max_residual() -> f64 {
    lambert_grid()
        .into_iter()
        .map(|x| {
            let w = lambert_w(x).expect("grid lies in the domain");
            (w * w.exp() - x).abs() / x.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Steps `n` events with a k = 1 aggregate and with the base step from equal
/// seeds; returns whether every reward and observation matched bitwise.
pub fn k1_trajectory_identical(params: CkParams, model: ObservationModel, seed: u64, n: usize) -> bool {
    let mut a = CkEnv::new(params, model);
    let mut b = CkEnv::new(params, model);
    let mut ra = ChaCha8Rng::seed_from_u64(seed);
    let mut rb = ChaCha8Rng::seed_from_u64(seed);
    let mut actions = ChaCha8Rng::seed_from_u64(seed ^ 1);
    (0..n).all(|_| {
        let action = actions.random_range(0..2);
        let x = aggregate_step(&mut a, action, 1, params.gamma, &mut ra);
        let y = base_step(&mut b, action, &mut rb);
        x.reward.to_bits() == y.reward.to_bits() && x.observation == y.observation && x.events_elapsed == 1
    })
}

/// As [`k1_trajectory_identical`] for a zero switching cost; the switch
/// wrapper's observation is compared after projecting out the previous action.
pub fn t0_trajectory_identical(params: CkParams, model: ObservationModel, seed: u64, n: usize) -> bool {
    let mut a = CkEnv::new(params, model);
    let mut b = CkEnv::new(params, model);
    let mut ra = ChaCha8Rng::seed_from_u64(seed);
    let mut rb = ChaCha8Rng::seed_from_u64(seed);
    let mut actions = ChaCha8Rng::seed_from_u64(seed ^ 1);
    let mut prev = 0;
    (0..n).all(|_| {
        let action = actions.random_range(0..2);
        let x = switch_step(&mut a, action, prev, 0.0, &mut ra);
        let y = base_step(&mut b, action, &mut rb);
        prev = action;
        x.step.reward.to_bits() == y.reward.to_bits()
            && x.step.observation / a.n_actions() == y.observation
            && x.step.observation % a.n_actions() == action
    })
}

fn ck_mdp(opts: &VerifyOptions, gamma: f64) -> FiniteMdp {
    build_discrete_mdp(&CkParams { gamma, ..opts.ck }, opts.n_buckets).expect("valid CK parameters")
}

pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let tol = opts.tol;
    let mut checks = Vec::new();
    let chain = reference_chain();
    let ck95 = ck_mdp(opts, 0.95);
    let ck99 = ck_mdp(opts, 0.99);

    for (label, mdp) in [("ck_g0.95", &ck95), ("ck_g0.99", &ck99), ("chain", &chain)] {
        let q = solve_q_star(mdp, tol).expect("valid mdp");
        checks.push(Check::at_most(
            format!("bellman_residual/{label}"),
            bellman_residual(mdp, &q),
            tol,
        ));
    }

    let seed = derive_seed(opts.seed, &["verify", "counterfactual"]);
    checks.push(Check::at_most(
        "counterfactual_identity/random50",
        counterfactual_max_error(seed, 50, 0.9, 1e-9),
        1e-6,
    ));

    for k in [2usize, 3, 5] {
        for (label, mdp) in [("ck_g0.95", &ck95), ("ck_g0.99", &ck99), ("chain", &chain)] {
            checks.push(repetition_check(
                &format!("repetition_identity/{label}_k{k}"),
                mdp,
                k,
                tol,
            ));
        }
    }
    for k in [2u32, 3, 5] {
        for (label, mdp) in [("ck_g0.95", &ck95), ("ck_g0.99", &ck99), ("chain", &chain)] {
            checks.push(aggregation_loss_check(
                &format!("aggregation_loss/{label}_k{k}"),
                mdp,
                k,
                tol,
            ));
            checks.push(amplified_advantage_check(
                &format!("amplified_advantage/{label}_k{k}"),
                mdp,
                k,
                tol,
            ));
        }
    }
    for (label, mdp) in [("ck_g0.95", &ck95), ("ck_g0.99", &ck99), ("chain", &chain)] {
        checks.push(amplification_check(&format!("amplification/{label}_k5"), mdp, 5, tol));
    }
    checks.push(Check::at_most(
        "amplification_identity/grid",
        amplification_identity_error(),
        1e-10,
    ));
    checks.push(Check::at_most("kappa_oracle/grid27", kappa_max_error(), 1e-6));
    checks.push(Check::at_most("lambert_residual/grid", lambert_max_residual(), 1e-12));
    for t in [1.0, 2.0, 3.0] {
        checks.push(switching_advantage_check(
            &format!("switching_advantage/ck_g0.95_T{t}"),
            &ck95,
            t,
            tol,
        ));
    }
    for t in CHAIN_SWITCH_COSTS {
        checks.push(switching_advantage_check(
            &format!("switching_advantage/chain_T{t}"),
            &chain,
            t,
            tol,
        ));
    }

    for (label, mdp) in [("ck_g0.95", &ck95), ("chain", &chain)] {
        let q = solve_q_star(mdp, tol).expect("valid mdp");
        let q1 = solve_q_star(&aggregate_mdp(mdp, 1).expect("k = 1"), tol).expect("valid mdp");
        checks.push(Check::at_most(
            format!("wrapper_identity/{label}_k1_values"),
            q.max_abs_diff(&q1),
            2.0 * tol,
        ));
        let ext = switching_cost_mdp(mdp, 0.0).expect("zero cost");
        let qe = solve_q_star(&ext.mdp, tol).expect("valid mdp");
        let worst = (0..qe.n_states())
            .flat_map(|x| (0..qe.n_actions()).map(move |a| (x, a)))
            .map(|(x, a)| (qe.get(x, a) - q.get(ext.base_state(x), a)).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            format!("wrapper_identity/{label}_T0_values"),
            worst,
            2.0 * tol,
        ));
    }
    let model = ObservationModel {
        sigma_n: 0.3,
        ..ObservationModel::default()
    };
    let traj_seed = derive_seed(opts.seed, &["verify", "trajectory"]);
    for (name, same) in [
        (
            "wrapper_identity/k1_trajectory",
            k1_trajectory_identical(opts.ck, model, traj_seed, 5_000),
        ),
        (
            "wrapper_identity/T0_trajectory",
            t0_trajectory_identical(opts.ck, model, traj_seed, 5_000),
        ),
    ] {
        let mismatch = if same { 0.0 } else { 1.0 };
        checks.push(Check::at_most(name, mismatch, 0.0).with_note("bitwise comparison over 5000 events"));
    }

    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_constructors() {
        assert!(Check::at_most("a", 1.0, 2.0).passed);
        assert!(!Check::at_least("b", 1.0, 2.0).passed);
        assert_eq!(Check::at_least("b", 1.0, 2.0).slack, -1.0);
        let v = Check::vacuous("c", 0.0, "nothing qualifies");
        assert!(v.passed && v.note.unwrap().starts_with("vacuous"));
    }

    #[test]
    fn random_mdps_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_mdp(5, 3, 0.9, &mut rng);
            assert_eq!(m.n_states(), 5);
        }
    }

    #[test]
    fn chain_is_non_vacuous() {
        let chain = reference_chain();
        for k in [2, 3, 5] {
            let c = amplified_advantage_check("t", &chain, k, DEFAULT_TOL);
            assert!(c.passed && c.measured.is_finite(), "{c}");
        }
        for t in CHAIN_SWITCH_COSTS {
            let c = switching_advantage_check("t", &chain, t, DEFAULT_TOL);
            assert!(c.passed && c.measured.is_finite(), "{c}");
        }
    }

    #[test]
    fn constant_greedy_on_absorbing_state() {
        // state 1 is absorbing and prefers action 0, state 0 prefers action 1
        let mdp = FiniteMdp::new(
            0.9,
            vec![
                vec![vec![0.0, 1.0], vec![0.0, 1.0]],
                vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            ],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let q = solve_q_star(&mdp, DEFAULT_TOL).unwrap();
        assert_eq!(constant_greedy_states(&mdp, &q, 1), vec![0, 1]);
        assert_eq!(constant_greedy_states(&mdp, &q, 2), vec![1]);
    }
}
