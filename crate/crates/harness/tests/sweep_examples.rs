//! Sweep rows against exact references.

use advamp_core::choc_kale::{build_discrete_mdp, nearest_grid_index, step, CkAction, CkParams, CkState};
use advamp_core::mdp::{greedy, solve_q_star, DEFAULT_TOL};
use advamp_core::qlearn::mean_and_std_error;
use advamp_core::Wrapper;
use advamp_harness::config::{EnvKind, ExperimentConfig};
use advamp_harness::sweep::{run_cell, run_once};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Return earned in the continuous simulator by the exact grid-optimal policy,
/// with expected rewards.
fn grid_optimum_return(params: &CkParams, n: usize, horizon: usize) -> f64 {
    let q = solve_q_star(&build_discrete_mdp(params, n).unwrap(), DEFAULT_TOL).unwrap();
    let policy = greedy(&q);
    let noiseless = params.noiseless();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut state = CkState { p: 0.0 };
    let (mut ret, mut disc) = (0.0, 1.0);
    for _ in 0..horizon {
        let action = CkAction::from_index(policy.action(nearest_grid_index(params, n, state.p))).unwrap();
        let (next, reward) = step(state, action, &noiseless, &mut rng);
        ret += disc * reward;
        disc *= params.gamma;
        state = next;
    }
    ret
}

#[test]
fn noiseless_event_level_cell_is_near_optimal() {
    let config = ExperimentConfig {
        environments: vec![EnvKind::Ck],
        wrappers: vec![Wrapper::None],
        gammas: vec![0.95],
        sigma_n: vec![0.0],
        ..ExperimentConfig::default()
    };
    let cell = config.cells()[0];
    let rows = run_cell(&config, &cell).unwrap();
    let mean = rows.iter().map(|r| r.mean_return).sum::<f64>() / rows.len() as f64;
    let optimum = grid_optimum_return(&config.ck_params(0.95), config.n_buckets, config.eval.horizon as usize);
    assert!(
        (mean - optimum).abs() / optimum <= 0.05,
        "mean {mean} vs optimum {optimum}"
    );
}

#[test]
fn std_error_matches_recorded_returns() {
    let config = ExperimentConfig {
        environments: vec![EnvKind::Slate],
        wrappers: vec![Wrapper::Switch { cost: 2.0 }],
        gammas: vec![0.9],
        sigma_n: vec![0.2],
        ..ExperimentConfig::default()
    };
    let cell = config.cells()[0];
    let outcome = run_once(&config, &cell, 3).unwrap();
    let returns = &outcome.eval.returns;
    assert_eq!(returns.len(), config.eval.n_rollouts);
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let sd = (returns.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((outcome.eval.std_error - sd / n.sqrt()).abs() < 1e-12);
    assert_eq!(mean_and_std_error(returns), (outcome.eval.mean, outcome.eval.std_error));
}
