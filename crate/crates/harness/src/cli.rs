use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use advamp_core::analysis::{bounds_report, BoundInputs};
use advamp_core::choc_kale::CkEnv;
use advamp_core::qlearn::{evaluate, mean_and_std_error, EvalResult, TrainedPolicy};
use advamp_core::slate::SlateEnv;
use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{Cell, ConfigError, EnvKind, ExperimentConfig, Overrides};
use crate::qvalues::{write_qvalues, QvaluesOptions};
use crate::sweep::{run_once, sweep, MetricRow, SweepError};
use crate::verify::{run_verify, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "advamp", version, about = "Advantage-amplification experiments and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-satisfaction Q-values on the Choc-Kale model (CSV)
    Qvalues(Common),
    /// Train and evaluate policies over the full grid (CSV)
    Sweep(Common),
    /// Run the identity and bound checks; exit 1 on any failure
    Verify {
        #[command(flatten)]
        common: Common,
        /// Emit the report as JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Evaluate every closed-form quantity for one set of inputs (JSON)
    Bounds(BoundsArgs),
    /// Train and evaluate the first cell of the grid, or evaluate a saved policy (JSON)
    Eval {
        #[command(flatten)]
        common: Common,
        /// Evaluate this saved policy instead of training
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Save the run-0 policy to this path
        #[arg(long)]
        save_policy: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (JSON); defaults apply to omitted fields
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long = "T")]
    pub switch_cost: Option<f64>,
    #[arg(long)]
    pub sigma_n: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// JSON object with the inputs; flags override its fields
    pub inputs: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            gamma: self.gamma,
            k: self.k,
            switch_cost: self.switch_cost,
            sigma_n: self.sigma_n,
            seed: self.seed,
        }
    }

    pub fn load(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        config.apply(&self.overrides())?;
        Ok(config)
    }
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

impl BoundsArgs {
    fn inputs(&self) -> Result<BoundInputs, ConfigError> {
        let mut doc = match &self.inputs {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&text)?
            }
            None => serde_json::Map::new(),
        };
        let fields = [
            ("gamma", self.gamma),
            ("L", self.l),
            ("k", self.k.map(f64::from)),
            ("T", self.t),
            ("r_max", self.r_max),
            ("epsilon", self.epsilon),
            ("A", self.a),
        ];
        for (name, value) in fields {
            if let Some(v) = value {
                let v = if name == "k" {
                    serde_json::json!(v as u32)
                } else {
                    serde_json::json!(v)
                };
                doc.insert(name.to_string(), v);
            }
        }
        let missing: Vec<&str> = fields
            .iter()
            .map(|(n, _)| *n)
            .filter(|n| !doc.contains_key(*n))
            .collect();
        if !missing.is_empty() {
            return Err(ConfigError::Invalid(format!(
                "missing required inputs: {}",
                missing.join(", ")
            )));
        }
        let inputs: BoundInputs = serde_json::from_value(serde_json::Value::Object(doc))?;
        inputs.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(inputs)
    }
}

#[derive(Debug, Serialize)]
struct EvalSummary {
    environment: EnvKind,
    wrapper: String,
    gamma: f64,
    sigma_n: f64,
    /// Mean and standard error across runs of the per-run mean returns.
    mean_return: f64,
    std_error: f64,
    runs: Vec<MetricRow>,
}

fn first_cell(config: &ExperimentConfig) -> Cell {
    config.cells()[0]
}

fn evaluate_saved(config: &ExperimentConfig, path: &PathBuf) -> anyhow::Result<EvalResult> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let policy = TrainedPolicy::from_json(&text).map_err(ConfigError::Parse)?;
    let cell = first_cell(config);
    let observation = config.observation(cell.sigma_n)?;
    let ev = config.eval;
    let seed = crate::seeds::derive_seed(config.seed, &[&cell.key(), "saved", "eval"]);
    Ok(match cell.environment {
        EnvKind::Ck => {
            let env = CkEnv::new(config.ck_params(cell.gamma), observation);
            evaluate(&env, &policy, ev.n_rollouts, ev.horizon, cell.gamma, seed)
        }
        EnvKind::Slate => {
            let env = SlateEnv::new(config.slate_params(cell.gamma), observation);
            evaluate(&env, &policy, ev.n_rollouts, ev.horizon, cell.gamma, seed)
        }
    })
}

fn is_config_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<ConfigError>().is_some()
            || matches!(e.downcast_ref::<SweepError>(), Some(SweepError::Config(_)))
    })
}

fn dispatch(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Qvalues(common) => {
            let config = common.load()?;
            let opts = QvaluesOptions::from_config(&config);
            write_qvalues(&config, &opts, output(&common.out)?)?;
        }
        Command::Sweep(common) => {
            let config = common.load()?;
            sweep(&config, output(&common.out)?)?;
        }
        Command::Verify { common, json } => {
            let config = common.load()?;
            let report = run_verify(&VerifyOptions::from_config(&config));
            let mut out = output(&common.out)?;
            if json {
                serde_json::to_writer_pretty(&mut out, &report)?;
                writeln!(out)?;
            } else {
                writeln!(out, "{report}")?;
            }
            out.flush()?;
            if !report.passed() {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
        Command::Bounds(args) => {
            let report = bounds_report(args.inputs()?).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            let mut out = output(&args.out)?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            out.flush()?;
        }
        Command::Eval {
            common,
            policy,
            save_policy,
        } => {
            let config = common.load()?;
            let mut out = output(&common.out)?;
            if let Some(path) = policy {
                let result = evaluate_saved(&config, &path)?;
                serde_json::to_writer_pretty(&mut out, &result)?;
            } else {
                let cell = first_cell(&config);
                let outcomes = (0..config.n_runs)
                    .map(|run| run_once(&config, &cell, run))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(path) = save_policy {
                    std::fs::write(&path, outcomes[0].policy.to_json())
                        .with_context(|| format!("cannot write {}", path.display()))?;
                }
                let runs: Vec<MetricRow> = outcomes
                    .iter()
                    .enumerate()
                    .map(|(run, o)| MetricRow::new(&cell, run, &o.eval))
                    .collect();
                let means: Vec<f64> = runs.iter().map(|r| r.mean_return).collect();
                let (mean_return, std_error) = mean_and_std_error(&means);
                let summary = EvalSummary {
                    environment: cell.environment,
                    wrapper: cell.wrapper.label(),
                    gamma: cell.gamma,
                    sigma_n: cell.sigma_n,
                    mean_return,
                    std_error,
                    runs,
                };
                serde_json::to_writer_pretty(&mut out, &summary)?;
            }
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(EXIT_OK)
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_config_error(&err) {
                EXIT_CONFIG
            } else {
                EXIT_VERIFY_FAILED
            }
        }
    }
}
