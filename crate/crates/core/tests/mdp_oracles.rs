//! Solver outputs against independent oracles: direct linear solves,
//! brute-force policy enumeration and the counterfactual identity on random MDPs.

#![allow(clippy::needless_range_loop)]

use advamp_core::choc_kale::{build_discrete_mdp, CkParams};
use advamp_core::mdp::{
    advantages, aggregate_mdp, counterfactual_gap, greedy, policy_q, smoothness, snr, solve_q_star, switching_cost_mdp,
    tail_horizon, DeterministicPolicy, FiniteMdp, DEFAULT_TOL,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_mdp(rng: &mut ChaCha8Rng, n_s: usize, n_a: usize, gamma: f64) -> FiniteMdp {
    let transition = (0..n_s)
        .map(|_| {
            (0..n_a)
                .map(|_| {
                    let w: Vec<f64> = (0..n_s)
                        .map(|_| if rng.random_bool(0.6) { rng.random::<f64>() } else { 0.0 })
                        .collect();
                    let total: f64 = w.iter().sum();
                    if total == 0.0 {
                        let mut row = vec![0.0; n_s];
                        row[rng.random_range(0..n_s)] = 1.0;
                        row
                    } else {
                        w.into_iter().map(|x| x / total).collect()
                    }
                })
                .collect()
        })
        .collect();
    let reward = (0..n_s)
        .map(|_| (0..n_a).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    FiniteMdp::new(gamma, transition, reward).unwrap()
}

fn random_policy(rng: &mut ChaCha8Rng, n_s: usize, n_a: usize) -> DeterministicPolicy {
    DeterministicPolicy::new((0..n_s).map(|_| rng.random_range(0..n_a)).collect())
}

/// `V = (I - gamma P_pi)^{-1} r_pi` by LU.
fn linear_values(mdp: &FiniteMdp, pi: &DeterministicPolicy) -> Vec<f64> {
    let n = mdp.n_states();
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for s in 0..n {
        let act = pi.action(s);
        b[s] = mdp.reward(s, act);
        for (s2, p) in mdp.transition_row(s, act).iter().enumerate() {
            a[(s, s2)] -= mdp.gamma() * p;
        }
    }
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

fn all_policies(n_s: usize, n_a: usize) -> Vec<DeterministicPolicy> {
    let total = n_a.pow(n_s as u32);
    (0..total)
        .map(|mut code| {
            DeterministicPolicy::new(
                (0..n_s)
                    .map(|_| {
                        let a = code % n_a;
                        code /= n_a;
                        a
                    })
                    .collect(),
            )
        })
        .collect()
}

#[test]
fn policy_q_matches_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n_s = rng.random_range(1..=12);
        let n_a = rng.random_range(1..=4);
        let mdp = random_mdp(&mut rng, n_s, n_a, 0.9);
        let pi = random_policy(&mut rng, n_s, n_a);
        let v = linear_values(&mdp, &pi);
        let q = policy_q(&mdp, &pi, DEFAULT_TOL).unwrap();
        for s in 0..n_s {
            assert!((q.get(s, pi.action(s)) - v[s]).abs() <= 2.0 * DEFAULT_TOL, "state {s}");
            for a in 0..n_a {
                let expect = mdp.reward(s, a)
                    + mdp.gamma() * mdp.transition_row(s, a).iter().zip(&v).map(|(p, x)| p * x).sum::<f64>();
                assert!((q.get(s, a) - expect).abs() <= 2.0 * DEFAULT_TOL);
            }
        }
    }
}

#[test]
fn q_star_matches_best_enumerated_policy() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..15 {
        let n_s = rng.random_range(2..=5);
        let n_a = rng.random_range(2..=3);
        let mdp = random_mdp(&mut rng, n_s, n_a, 0.8);
        let q = solve_q_star(&mdp, DEFAULT_TOL).unwrap();
        let value_sets: Vec<Vec<f64>> = all_policies(n_s, n_a).iter().map(|p| linear_values(&mdp, p)).collect();
        for s in 0..n_s {
            let best = value_sets.iter().map(|v| v[s]).fold(f64::NEG_INFINITY, f64::max);
            assert!((q.max_value(s) - best).abs() <= 2.0 * DEFAULT_TOL);
        }
        // the greedy policy attains the optimum everywhere
        let vg = linear_values(&mdp, &greedy(&q));
        for s in 0..n_s {
            assert!((vg[s] - q.max_value(s)).abs() <= 1e-6);
        }
    }
}

#[test]
fn bellman_residual_within_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for &gamma in &[0.5, 0.9, 0.99] {
        let mdp = random_mdp(&mut rng, 8, 3, gamma);
        for tol in [1e-4, 1e-8] {
            let q = solve_q_star(&mdp, tol).unwrap();
            assert!(mdp.bellman_optimality(&q).max_abs_diff(&q) <= tol);
        }
    }
}

#[test]
fn counterfactual_identity_on_random_mdps() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let n_s = rng.random_range(1..=10);
        let n_a = rng.random_range(1..=4);
        let mdp = random_mdp(&mut rng, n_s, n_a, 0.9);
        let pi = random_policy(&mut rng, n_s, n_a);
        let rho = random_policy(&mut rng, n_s, n_a);
        let b = rng.random_range(0..n_s);
        let horizon = tail_horizon(0.9, 4.0 / 0.1, 1e-10);
        let gap = counterfactual_gap(&mdp, &pi, &rho, b, horizon, 1e-10).unwrap();
        // lhs from the linear-solve oracle
        let lhs = linear_values(&mdp, &pi)[b] - linear_values(&mdp, &rho)[b];
        assert!((gap.lhs - lhs).abs() <= 1e-8);
        worst = worst.max(gap.error());
    }
    assert!(worst <= 1e-6, "max |lhs - rhs| = {worst}");
}

#[test]
fn aggregated_mdp_matches_block_propagation() {
    // The k-step kernel and discounted block reward, propagated explicitly,
    // and the value of a block policy as a fixed point of that expansion.
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for k in [1usize, 2, 4] {
        let mdp = random_mdp(&mut rng, 5, 2, 0.9);
        let pi = random_policy(&mut rng, 5, 2);
        let agg = aggregate_mdp(&mdp, k).unwrap();
        let v_agg = linear_values(&agg, &pi);
        for s in 0..5 {
            let a = pi.action(s);
            let mut dist = vec![0.0; 5];
            dist[s] = 1.0;
            let mut reward = 0.0;
            let mut disc = 1.0;
            for _ in 0..k {
                reward += disc * dist.iter().enumerate().map(|(i, p)| p * mdp.reward(i, a)).sum::<f64>();
                let mut next = vec![0.0; 5];
                for (i, p) in dist.iter().enumerate() {
                    for (j, t) in mdp.transition_row(i, a).iter().enumerate() {
                        next[j] += p * t;
                    }
                }
                dist = next;
                disc *= 0.9;
            }
            assert!((agg.reward(s, a) - reward).abs() < 1e-12);
            for (j, p) in dist.iter().enumerate() {
                assert!((agg.transition(s, a, j) - p).abs() < 1e-12);
            }
            let expect = reward + disc * dist.iter().zip(&v_agg).map(|(p, v)| p * v).sum::<f64>();
            assert!((v_agg[s] - expect).abs() < 1e-9);
        }
        assert!((agg.gamma() - 0.9_f64.powi(k as i32)).abs() < 1e-15);
        if k == 1 {
            let base = linear_values(&mdp, &pi);
            for s in 0..5 {
                assert!((base[s] - v_agg[s]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn repetition_value_identity_on_ck() {
    // Where the greedy action stays constant over the whole block, one
    // aggregated backup of V* returns V*.
    let params = CkParams::default();
    let mdp = build_discrete_mdp(&params, 50).unwrap();
    let q = solve_q_star(&mdp, DEFAULT_TOL).unwrap();
    let pi = greedy(&q);
    let v: Vec<f64> = (0..50).map(|s| q.max_value(s)).collect();
    for k in [2usize, 3, 5] {
        let agg = aggregate_mdp(&mdp, k).unwrap();
        let mut checked = 0;
        for b in 0..50 {
            let a = pi.action(b);
            // deterministic kernel: follow the path
            let mut s = b;
            let mut constant = true;
            for _ in 0..k {
                if pi.action(s) != a {
                    constant = false;
                    break;
                }
                s = (0..50).find(|&j| mdp.transition(s, a, j) == 1.0).unwrap();
            }
            if !constant {
                continue;
            }
            checked += 1;
            let backed = agg.reward(b, a) + agg.gamma() * v[s];
            assert!((backed - v[b]).abs() <= 2.0 * DEFAULT_TOL, "k {k} state {b}");
        }
        assert!(checked > 0);
    }
}

#[test]
fn switching_cost_zero_and_large() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mdp = random_mdp(&mut rng, 6, 3, 0.9);
    let q = solve_q_star(&mdp, DEFAULT_TOL).unwrap();
    let ext = switching_cost_mdp(&mdp, 0.0).unwrap();
    let qe = solve_q_star(&ext.mdp, DEFAULT_TOL).unwrap();
    for x in 0..ext.mdp.n_states() {
        for a in 0..3 {
            assert!((qe.get(x, a) - q.get(ext.base_state(x), a)).abs() <= 2.0 * DEFAULT_TOL);
        }
    }
    // a prohibitive cost makes staying optimal from every extended state
    let ext = switching_cost_mdp(&mdp, 1e3).unwrap();
    let qe = solve_q_star(&ext.mdp, DEFAULT_TOL).unwrap();
    for x in 0..ext.mdp.n_states() {
        assert_eq!(qe.argmax(x), ext.prev_action(x));
    }
}

#[test]
fn aggregation_bounds_on_random_mdps() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let mdp = random_mdp(&mut rng, 6, 2, 0.9);
        let q = solve_q_star(&mdp, DEFAULT_TOL).unwrap();
        let l = smoothness(&mdp, &q).unwrap();
        let adv = advantages(&q).unwrap();
        for k in [2u32, 3] {
            let qa = solve_q_star(&aggregate_mdp(&mdp, k as usize).unwrap(), DEFAULT_TOL).unwrap();
            let adv_a = advantages(&qa).unwrap();
            let bound = 2.0 * k as f64 * l / (1.0 - 0.9);
            for b in 0..6 {
                assert!((q.max_value(b) - qa.max_value(b)).abs() <= bound + 2.0 * DEFAULT_TOL);
                if let Ok(lower) = advamp_core::analysis::amplified_advantage_lower(adv.advantage(b), k, l, 0.9) {
                    assert!(adv_a.advantage(b) >= lower - 2.0 * DEFAULT_TOL);
                }
            }
        }
    }
}

#[test]
fn snr_on_ck_at_median_threshold() {
    let params = CkParams::default();
    let mdp = build_discrete_mdp(&params, 50).unwrap();
    let q = solve_q_star(&mdp, DEFAULT_TOL).unwrap();
    let mut adv = advantages(&q).unwrap().values();
    adv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = adv[adv.len() / 2];
    let gamma = params.gamma;
    let r_max = mdp.r_max();
    let epsilon = median * (1.0 - gamma).powi(2) / (2.0 * r_max);
    let top = adv[adv.len() - 1];
    let small = adv
        .iter()
        .copied()
        .filter(|&a| a <= median * (1.0 + 1e-12))
        .fold(0.0, f64::max);
    let expect = top / small - 1.0;
    let got = snr(&q, epsilon, r_max, gamma).unwrap();
    assert!(
        (got - expect).abs() <= 1e-9 * expect.abs().max(1.0),
        "{got} vs {expect}"
    );
}
