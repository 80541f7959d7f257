use std::io::Write;

use advamp_core::choc_kale::CkEnv;
use advamp_core::qlearn::{evaluate, train, EvalResult, QLearnConfig, QLearnError, TrainedPolicy};
use advamp_core::slate::SlateEnv;
use advamp_core::Wrapper;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, ConfigError, EnvKind, ExperimentConfig};
use crate::seeds::derive_seed;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Train(#[from] QLearnError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("output failed: {0}")]
    Io(#[from] std::io::Error),
}

/// One trained-and-evaluated policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub environment: EnvKind,
    pub wrapper: String,
    pub k: u32,
    #[serde(rename = "T")]
    pub switch_cost: f64,
    pub gamma: f64,
    pub sigma_n: f64,
    pub run: usize,
    pub mean_return: f64,
    pub std_error: f64,
}

impl MetricRow {
    pub fn new(cell: &Cell, run: usize, eval: &EvalResult) -> Self {
        let (k, switch_cost) = match cell.wrapper {
            Wrapper::None => (1, 0.0),
            Wrapper::Aggregate { k } => (k, 0.0),
            Wrapper::Switch { cost } => (1, cost),
        };
        Self {
            environment: cell.environment,
            wrapper: cell.wrapper.label(),
            k,
            switch_cost,
            gamma: cell.gamma,
            sigma_n: cell.sigma_n,
            run,
            mean_return: eval.mean,
            std_error: eval.std_error,
        }
    }
}

/// Outcome of one replica: the learned policy plus its evaluation.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub policy: TrainedPolicy,
    pub eval: EvalResult,
}

pub fn run_seeds(config: &ExperimentConfig, cell: &Cell, run: usize) -> (u64, u64) {
    let key = cell.key();
    let run = run.to_string();
    (
        derive_seed(config.seed, &[&key, &run, "train"]),
        derive_seed(config.seed, &[&key, &run, "eval"]),
    )
}

/// Train one policy on a fresh environment and evaluate it from the start state.
pub fn run_once(config: &ExperimentConfig, cell: &Cell, run: usize) -> Result<RunOutcome, SweepError> {
    let (train_seed, eval_seed) = run_seeds(config, cell, run);
    let qlearn = QLearnConfig {
        gamma: cell.gamma,
        seed: train_seed,
        ..config.qlearn
    };
    let observation = config.observation(cell.sigma_n)?;
    let ev = config.eval;
    let outcome = match cell.environment {
        EnvKind::Ck => {
            let mut env = CkEnv::new(config.ck_params(cell.gamma), observation);
            let policy = train(&mut env, cell.wrapper, &qlearn)?;
            let eval = evaluate(&env, &policy, ev.n_rollouts, ev.horizon, cell.gamma, eval_seed);
            RunOutcome { policy, eval }
        }
        EnvKind::Slate => {
            let mut env = SlateEnv::new(config.slate_params(cell.gamma), observation);
            let policy = train(&mut env, cell.wrapper, &qlearn)?;
            let eval = evaluate(&env, &policy, ev.n_rollouts, ev.horizon, cell.gamma, eval_seed);
            RunOutcome { policy, eval }
        }
    };
    Ok(outcome)
}

/// All replicas of one cell, run in parallel, ordered by run index.
pub fn run_cell(config: &ExperimentConfig, cell: &Cell) -> Result<Vec<MetricRow>, SweepError> {
    (0..config.n_runs)
        .into_par_iter()
        .map(|run| run_once(config, cell, run).map(|o| MetricRow::new(cell, run, &o.eval)))
        .collect()
}

/// Run the full grid, writing CSV rows cell by cell so an interrupted sweep
/// keeps every finished cell.
pub fn sweep<W: Write>(config: &ExperimentConfig, out: W) -> Result<Vec<MetricRow>, SweepError> {
    config.validate()?;
    let mut writer = csv::Writer::from_writer(out);
    let mut all = Vec::new();
    for cell in config.cells() {
        let rows = run_cell(config, &cell)?;
        for row in &rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        all.extend(rows);
    }
    Ok(all)
}

/// Mean of `mean_return` over the rows matching a predicate.
pub fn mean_return(rows: &[MetricRow], pred: impl Fn(&MetricRow) -> bool) -> Option<f64> {
    let picked: Vec<f64> = rows.iter().filter(|r| pred(r)).map(|r| r.mean_return).collect();
    if picked.is_empty() {
        None
    } else {
        Some(picked.iter().sum::<f64>() / picked.len() as f64)
    }
}
