//! Per-satisfaction Q-values on the Choc-Kale model: exact values on the
//! discretized MDP (event level and aggregated) and tabular estimates from
//! replicated noisy Q-learning runs.

use std::io::Write;

use advamp_core::choc_kale::{build_discrete_mdp, exposure_grid, satisfaction, CkAction, CkEnv};
use advamp_core::mdp::{aggregate_mdp, solve_q_star, QTable, DEFAULT_TOL};
use advamp_core::qlearn::{train, QLearnConfig, TrainedPolicy};
use advamp_core::Wrapper;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::seeds::derive_seed;
use crate::sweep::SweepError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QvaluesOptions {
    pub gamma: f64,
    pub k: u32,
    pub sigma_n: f64,
}

impl QvaluesOptions {
    const PREFERRED_K: u32 = 5;
    const PREFERRED_SIGMA_N: f64 = 0.3;

    /// Largest gamma of the config, `k = 5` and `sigma_n = 0.3` when the grid
    /// contains them, otherwise the first aggregation horizon and the first
    /// positive noise level. A grid narrowed by CLI overrides therefore wins.
    pub fn from_config(config: &ExperimentConfig) -> Self {
        let ks: Vec<u32> = config
            .wrappers
            .iter()
            .filter_map(|w| match *w {
                Wrapper::Aggregate { k } => Some(k),
                _ => None,
            })
            .collect();
        let k = if ks.is_empty() || ks.contains(&Self::PREFERRED_K) {
            Self::PREFERRED_K
        } else {
            ks[0]
        };
        let sigma_n = if config.sigma_n.contains(&Self::PREFERRED_SIGMA_N) {
            Self::PREFERRED_SIGMA_N
        } else {
            config
                .sigma_n
                .iter()
                .copied()
                .find(|&s| s > 0.0)
                .unwrap_or(Self::PREFERRED_SIGMA_N)
        };
        let gamma = config.gammas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { gamma, k, sigma_n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QValueRow {
    /// `exact`, `exact_aggregated`, `learned` or `learned_aggregated`.
    pub panel: &'static str,
    pub gamma: f64,
    pub k: u32,
    pub sigma_n: f64,
    pub bucket: usize,
    pub bucket_satisfaction: f64,
    pub action: &'static str,
    /// `exact`, `mean` or a run index.
    pub source: String,
    pub q_value: f64,
}

/// Exact event-level and aggregated Q* on the discretized MDP, indexed by grid point.
pub fn exact_q(config: &ExperimentConfig, gamma: f64, k: u32) -> (QTable, QTable) {
    let params = config.ck_params(gamma);
    let mdp = build_discrete_mdp(&params, config.n_buckets).expect("validated params give a valid MDP");
    let q = solve_q_star(&mdp, DEFAULT_TOL).expect("validated MDP");
    let agg = aggregate_mdp(&mdp, k as usize).expect("k >= 1");
    let qa = solve_q_star(&agg, DEFAULT_TOL).expect("validated MDP");
    (q, qa)
}

/// `config.n_runs` independent noisy Q-learning runs on the CK simulator.
pub fn learned_runs(
    config: &ExperimentConfig,
    gamma: f64,
    wrapper: Wrapper,
    sigma_n: f64,
) -> Result<Vec<TrainedPolicy>, SweepError> {
    let observation = config.observation(sigma_n)?;
    (0..config.n_runs)
        .into_par_iter()
        .map(|run| {
            let seed = derive_seed(
                config.seed,
                &[
                    "qvalues",
                    &gamma.to_string(),
                    &wrapper.label(),
                    &sigma_n.to_string(),
                    &run.to_string(),
                ],
            );
            let qlearn = QLearnConfig {
                gamma,
                seed,
                ..config.qlearn
            };
            let mut env = CkEnv::new(config.ck_params(gamma), observation);
            Ok(train(&mut env, wrapper, &qlearn)?)
        })
        .collect()
}

pub fn qvalue_rows(config: &ExperimentConfig, opts: &QvaluesOptions) -> Result<Vec<QValueRow>, SweepError> {
    let mut rows = Vec::new();
    let (q, qa) = exact_q(config, opts.gamma, opts.k);
    let params = config.ck_params(opts.gamma);
    let grid = exposure_grid(&params, config.n_buckets);
    let row = |panel, k, sigma_n, bucket, s, action: CkAction, source: &str, v| QValueRow {
        panel,
        gamma: opts.gamma,
        k,
        sigma_n,
        bucket,
        bucket_satisfaction: s,
        action: action.name(),
        source: source.to_string(),
        q_value: v,
    };
    for (panel, k, table) in [("exact", 1, &q), ("exact_aggregated", opts.k, &qa)] {
        for (i, &p) in grid.iter().enumerate() {
            let s = satisfaction(p, params.tau);
            for action in CkAction::ALL {
                rows.push(row(panel, k, 0.0, i, s, action, "exact", table.get(i, action.index())));
            }
        }
    }
    let observation = config.observation(opts.sigma_n)?;
    for (panel, k, wrapper) in [
        ("learned", 1, Wrapper::None),
        ("learned_aggregated", opts.k, Wrapper::Aggregate { k: opts.k }),
    ] {
        let runs = learned_runs(config, opts.gamma, wrapper, opts.sigma_n)?;
        for bucket in 0..config.n_buckets {
            let s = observation.bucket_center(bucket);
            for action in CkAction::ALL {
                let mut sum = 0.0;
                for (run, policy) in runs.iter().enumerate() {
                    let v = policy.q.get(bucket, action.index());
                    sum += v;
                    rows.push(row(panel, k, opts.sigma_n, bucket, s, action, &run.to_string(), v));
                }
                rows.push(row(
                    panel,
                    k,
                    opts.sigma_n,
                    bucket,
                    s,
                    action,
                    "mean",
                    sum / runs.len() as f64,
                ));
            }
        }
    }
    Ok(rows)
}

pub fn write_qvalues<W: Write>(config: &ExperimentConfig, opts: &QvaluesOptions, out: W) -> Result<(), SweepError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in qvalue_rows(config, opts)? {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Indices where `Q(Kale) - Q(Choc)` changes sign along the grid.
pub fn kale_choc_crossovers(q: &QTable) -> Vec<usize> {
    let diff: Vec<f64> = (0..q.n_states())
        .map(|i| q.get(i, CkAction::Kale.index()) - q.get(i, CkAction::Choc.index()))
        .collect();
    diff.windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] > 0.0) != (w[1] > 0.0))
        .map(|(i, _)| i + 1)
        .collect()
}
