//! Simulator statistics against closed forms and the exact grid model.

use advamp_core::choc_kale::{
    build_discrete_mdp, exposure_grid, nearest_grid_index, satisfaction, step, CkAction, CkParams, CkState,
    ObservationModel,
};
use advamp_core::mdp::{greedy, solve_q_star, QTable, DEFAULT_TOL};
use advamp_core::slate::{draw_slate, SlateParams, SlateState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Composite Simpson rule with an even number of panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// CDF of `N(0, sigma^2)` truncated to `[-1, 1]`.
fn truncated_cdf(x: f64, sigma: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    let mass = |hi: f64| simpson(std_normal_pdf, -1.0 / sigma, hi / sigma, 2000);
    mass(x) / mass(1.0)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn bucket_distribution_matches_truncated_normal() {
    let (s, sigma, n) = (0.5, 0.3, 50);
    let model = ObservationModel::new(sigma, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 100_000;
    let mut counts = vec![0usize; n];
    for _ in 0..draws {
        counts[model.observe(s, &mut rng)] += 1;
    }
    let width = 1.0 / n as f64;
    let mut worst = 0.0_f64;
    for (b, &c) in counts.iter().enumerate() {
        // clamping folds everything below 0 into the first bucket and above 1 into the last
        let lo = if b == 0 { -1.0 } else { b as f64 * width - s };
        let hi = if b == n - 1 { 1.0 } else { (b + 1) as f64 * width - s };
        let expect = truncated_cdf(hi, sigma) - truncated_cdf(lo, sigma);
        worst = worst.max((c as f64 / draws as f64 - expect).abs());
    }
    assert!(worst <= 0.01, "max bucket probability error {worst}");
}

#[test]
fn slate_items_follow_truncated_normal_mean() {
    let params = SlateParams::default();
    let state = SlateState {
        p: 0.0,
        last_kaleness: 0.2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let items: Vec<f64> = (0..20_000)
        .flat_map(|_| draw_slate(&state, &params, &mut rng))
        .collect();
    let (mean, se) = mean_and_se(&items);

    let (mu, sd) = (state.last_kaleness, params.item_std);
    let (alpha, beta) = ((0.0 - mu) / sd, (1.0 - mu) / sd);
    let z = simpson(std_normal_pdf, alpha, beta, 4000);
    let expect = mu + sd * (std_normal_pdf(alpha) - std_normal_pdf(beta)) / z;
    assert!((mean - expect).abs() <= 4.0 * se, "mean {mean} expect {expect} se {se}");
    assert!(items.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn engagement_mean_is_satisfaction_times_scale() {
    let params = CkParams::default();
    let state = CkState { p: 1.5 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for action in CkAction::ALL {
        let rewards: Vec<f64> = (0..1_000_000)
            .map(|_| step(state, action, &params, &mut rng).1)
            .collect();
        let (mean, se) = mean_and_se(&rewards);
        let expect = satisfaction(state.p, params.tau) * params.mean_engagement(action);
        assert!(
            (mean - expect).abs() <= 4.0 * se,
            "{action:?}: {mean} vs {expect} (se {se})"
        );
    }
}

#[test]
fn noiseless_observation_is_deterministic() {
    let model = ObservationModel::new(0.0, 50).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(model.observe(0.5, &mut rng), 25);
    for s in [0.0, 0.013, 0.31, 0.999, 1.0] {
        let first = model.observe(s, &mut rng);
        assert!((0..20).all(|_| model.observe(s, &mut rng) == first));
        assert_eq!(first, model.bucket(s));
    }
}

#[test]
fn grid_model_is_deterministic() {
    let params = CkParams::default();
    let n = 50;
    let mdp = build_discrete_mdp(&params, n).unwrap();
    for s in 0..n {
        for a in 0..2 {
            let row = mdp.transition_row(s, a);
            assert_eq!(row.iter().filter(|&&p| p == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&p| p == 0.0).count(), n - 1);
        }
    }
    let start = nearest_grid_index(&params, n, 0.0);
    let kale_next = mdp
        .transition_row(start, CkAction::Kale.index())
        .iter()
        .position(|&p| p == 1.0)
        .unwrap();
    let grid = exposure_grid(&params, n);
    assert_eq!(
        kale_next,
        nearest_grid_index(&params, n, grid[start] * params.beta + 1.0)
    );
    let nearest_one = (0..n)
        .min_by(|&a, &b| (grid[a] - 1.0).abs().partial_cmp(&(grid[b] - 1.0).abs()).unwrap())
        .unwrap();
    assert_eq!(kale_next, nearest_one);
}

/// Discounted return of the exact grid policy played in the continuous noiseless simulator.
fn simulated_value(params: &CkParams, n: usize) -> (f64, f64) {
    let mdp = build_discrete_mdp(params, n).unwrap();
    let q = solve_q_star(&mdp, DEFAULT_TOL).unwrap();
    let policy = greedy(&q);
    let noiseless = params.noiseless();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut state = CkState { p: 0.0 };
    let (mut ret, mut disc) = (0.0, 1.0);
    for _ in 0..2000 {
        let action = policy.action(nearest_grid_index(params, n, state.p));
        let (next, reward) = step(state, CkAction::from_index(action).unwrap(), &noiseless, &mut rng);
        ret += disc * reward;
        disc *= params.gamma;
        state = next;
    }
    (ret, q.max_value(nearest_grid_index(params, n, 0.0)))
}

#[test]
fn discretization_error_shrinks_with_refinement() {
    let params = CkParams::default();
    let errors: Vec<f64> = [50, 200, 800]
        .iter()
        .map(|&n| {
            let (sim, exact) = simulated_value(&params, n);
            (sim - exact).abs() / exact
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[2] < 0.01, "{errors:?}");
}

fn crossovers(q: &QTable) -> usize {
    let diff: Vec<f64> = (0..q.n_states())
        .map(|s| q.get(s, CkAction::Kale.index()) - q.get(s, CkAction::Choc.index()))
        .collect();
    diff.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
}

#[test]
fn exact_optimum_switches_once_along_exposure() {
    let params = CkParams {
        gamma: 0.99,
        ..CkParams::default()
    };
    let mdp = build_discrete_mdp(&params, 50).unwrap();
    let q = solve_q_star(&mdp, DEFAULT_TOL).unwrap();
    assert_eq!(crossovers(&q), 1);
    // Kale where exposure is low, Choc once it is high
    assert_eq!(q.argmax(0), CkAction::Kale.index());
    assert_eq!(q.argmax(49), CkAction::Choc.index());
}
