use std::fmt;
use std::path::Path;

use advamp_core::choc_kale::{CkParams, ObservationModel};
use advamp_core::qlearn::QLearnConfig;
use advamp_core::slate::SlateParams;
use advamp_core::Wrapper;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Ck,
    Slate,
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::Ck => "ck",
            EnvKind::Slate => "slate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub n_rollouts: usize,
    pub horizon: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            n_rollouts: 100,
            horizon: 1000,
        }
    }
}

/// A sweep over environments × wrappers × discounts × observation noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environments: Vec<EnvKind>,
    pub wrappers: Vec<Wrapper>,
    pub gammas: Vec<f64>,
    pub sigma_n: Vec<f64>,
    pub n_runs: usize,
    pub n_buckets: usize,
    pub seed: u64,
    /// `gamma` and `seed` are overwritten per run.
    pub qlearn: QLearnConfig,
    pub eval: EvalConfig,
    /// `gamma` is overwritten per cell.
    pub ck: CkParams,
    pub slate: SlateParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            environments: vec![EnvKind::Ck, EnvKind::Slate],
            wrappers: vec![
                Wrapper::None,
                Wrapper::Aggregate { k: 3 },
                Wrapper::Aggregate { k: 5 },
                Wrapper::Switch { cost: 1.0 },
                Wrapper::Switch { cost: 2.0 },
                Wrapper::Switch { cost: 3.0 },
            ],
            gammas: vec![0.95, 0.99],
            sigma_n: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            n_runs: 10,
            n_buckets: 50,
            seed: 0,
            qlearn: QLearnConfig::default(),
            eval: EvalConfig::default(),
            ck: CkParams::default(),
            slate: SlateParams::default(),
        }
    }
}

/// Command-line overrides; each one replaces the corresponding grid.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub k: Option<u32>,
    pub switch_cost: Option<f64>,
    pub sigma_n: Option<f64>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(json)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Apply overrides. `--k` and `--T` together yield both wrappers.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(g) = o.gamma {
            self.gammas = vec![g];
        }
        if o.k.is_some() || o.switch_cost.is_some() {
            self.wrappers =
                o.k.map(|k| Wrapper::Aggregate { k })
                    .into_iter()
                    .chain(o.switch_cost.map(|cost| Wrapper::Switch { cost }))
                    .collect();
        }
        if let Some(s) = o.sigma_n {
            self.sigma_n = vec![s];
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        for (name, empty) in [
            ("environments", self.environments.is_empty()),
            ("wrappers", self.wrappers.is_empty()),
            ("gammas", self.gammas.is_empty()),
            ("sigma_n", self.sigma_n.is_empty()),
        ] {
            if empty {
                return invalid(format!("{name} must be nonempty"));
            }
        }
        if self.n_runs == 0 {
            return invalid("n_runs must be positive".into());
        }
        if self.eval.n_rollouts == 0 || self.eval.horizon == 0 {
            return invalid("eval.n_rollouts and eval.horizon must be positive".into());
        }
        for w in &self.wrappers {
            w.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        for &g in &self.gammas {
            if !(g > 0.0 && g < 1.0) {
                return invalid(format!("gamma {g} must lie in (0, 1)"));
            }
            let q = QLearnConfig {
                gamma: g,
                ..self.qlearn
            };
            q.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            self.ck_params(g)
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        for &s in &self.sigma_n {
            self.observation(s)?;
        }
        self.slate.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn ck_params(&self, gamma: f64) -> CkParams {
        CkParams { gamma, ..self.ck }
    }

    pub fn slate_params(&self, gamma: f64) -> SlateParams {
        SlateParams {
            ck: self.ck_params(gamma),
            ..self.slate.clone()
        }
    }

    pub fn observation(&self, sigma_n: f64) -> Result<ObservationModel, ConfigError> {
        ObservationModel::new(sigma_n, self.n_buckets).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Cells in grid order: environment, wrapper, gamma, sigma_n.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &environment in &self.environments {
            for &wrapper in &self.wrappers {
                for &gamma in &self.gammas {
                    for &sigma_n in &self.sigma_n {
                        cells.push(Cell {
                            environment,
                            wrapper,
                            gamma,
                            sigma_n,
                        });
                    }
                }
            }
        }
        cells
    }
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub environment: EnvKind,
    pub wrapper: Wrapper,
    pub gamma: f64,
    pub sigma_n: f64,
}

impl Cell {
    /// Canonical identifier used for seed derivation.
    pub fn key(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            self.environment,
            self.wrapper.label(),
            self.gamma,
            self.sigma_n
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let config = ExperimentConfig::default();
        config.validate().unwrap();
        let json = serde_json::to_string(&config).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), config);
        assert_eq!(config.cells().len(), 2 * 6 * 2 * 6);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let config = ExperimentConfig::from_json(
            r#"{"environments": ["ck"], "wrappers": [{"type": "aggregate", "k": 5}], "n_runs": 3}"#,
        )
        .unwrap();
        assert_eq!(config.n_runs, 3);
        assert_eq!(config.gammas, vec![0.95, 0.99]);
        assert_eq!(config.ck.mu_choc, 8.0);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_json(r#"{"gammas": []}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"gammas": [1.0]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sigma_n": [-0.1]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"wrappers": [{"type": "aggregate", "k": 0}]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"n_buckets": 0}"#).is_err());
    }

    #[test]
    fn overrides_replace_grids() {
        let mut config = ExperimentConfig::default();
        config
            .apply(&Overrides {
                gamma: Some(0.9),
                k: Some(4),
                switch_cost: Some(2.5),
                sigma_n: Some(0.2),
                seed: Some(7),
            })
            .unwrap();
        assert_eq!(config.gammas, vec![0.9]);
        assert_eq!(
            config.wrappers,
            vec![Wrapper::Aggregate { k: 4 }, Wrapper::Switch { cost: 2.5 }]
        );
        assert_eq!(config.sigma_n, vec![0.2]);
        assert_eq!(config.seed, 7);
        assert!(config
            .apply(&Overrides {
                k: Some(0),
                ..Overrides::default()
            })
            .is_err());
    }
}
