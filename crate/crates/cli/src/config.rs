//! Strict JSON experiment configuration (`schema: "pairig-config/1"`).
//! Unknown keys are errors so typos in schedule parameters cannot
//! silently change asymptotics.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::experiments::{CustomProblemSpec, SvmDatasetSpec, TrafficNetworkSpec};
use pairig::Schedule;

pub const CONFIG_SCHEMA: &str = "pairig-config/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub problem: ProblemSelector,
    pub solver: SolverSelector,
    pub schedule: ScheduleConfig,
    /// Averaging exponent for pair-IG.
    #[serde(default)]
    pub r: f64,
    pub epochs: usize,
    /// Seed for solver-side randomness (sampling baselines, metrics).
    pub seed: u64,
    #[serde(default)]
    pub instrumentation: InstrumentationLevel,
    #[serde(default)]
    pub logging: LoggingConfig,
    /// Constant stepsize override for the baseline methods; they default
    /// to the diminishing `gamma0/√(k+1)` rule otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_stepsize: Option<f64>,
    /// Optional initial point; defaults to the projection of the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "kebab-case")]
pub enum ProblemSelector {
    Traffic(TrafficNetworkSpec),
    Svm(SvmDatasetSpec),
    Custom { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverSelector {
    PairIg,
    ProjectedIg,
    ProximalIag,
    Saga,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "kebab-case")]
pub enum ScheduleConfig {
    Rate {
        gamma0: f64,
        eta0: f64,
        b: f64,
    },
    Tikhonov {
        gamma: f64,
        eta: f64,
        a: f64,
        b: f64,
        big_gamma: f64,
    },
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<Schedule<f64>> {
        let schedule = match *self {
            ScheduleConfig::Rate { gamma0, eta0, b } => Schedule::rate(gamma0, eta0, b),
            ScheduleConfig::Tikhonov {
                gamma,
                eta,
                a,
                b,
                big_gamma,
            } => Schedule::tikhonov(gamma, eta, a, b, big_gamma),
        };
        schedule.map_err(|e| anyhow::anyhow!("invalid schedule: {e}"))
    }

    pub fn gamma0(&self) -> f64 {
        match *self {
            ScheduleConfig::Rate { gamma0, .. } => gamma0,
            ScheduleConfig::Tikhonov {
                gamma, a, big_gamma, ..
            } => gamma / big_gamma.powf(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InstrumentationLevel {
    #[default]
    MetricsOnly,
    FullInvariants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LoggingConfig {
    /// Every epoch up to 100, then geometric stride 1.1.
    #[default]
    Default,
    EveryEpoch,
}

impl LoggingConfig {
    pub fn build(&self) -> pairig::LogSchedule {
        match self {
            LoggingConfig::Default => pairig::LogSchedule::default_stride(),
            LoggingConfig::EveryEpoch => pairig::LogSchedule::EveryEpoch,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_str_validated(&raw)
    }

    pub fn from_str_validated(raw: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(raw).context("parsing experiment config")?;
        if config.schema != CONFIG_SCHEMA {
            bail!(
                "unsupported config schema {:?}; expected {CONFIG_SCHEMA:?}",
                config.schema
            );
        }
        if config.r < 0.0 || config.r >= 1.0 {
            bail!("config r must lie in [0, 1)");
        }
        config.schedule.build()?;
        Ok(config)
    }

    pub fn load_custom_problem(&self, config_dir: &Path) -> Result<Option<CustomProblemSpec>> {
        match &self.problem {
            ProblemSelector::Custom { path } => {
                let resolved = if Path::new(path).is_absolute() {
                    Path::new(path).to_path_buf()
                } else {
                    config_dir.join(path)
                };
                let raw = std::fs::read_to_string(&resolved)
                    .with_context(|| format!("reading custom problem {}", resolved.display()))?;
                let spec: CustomProblemSpec =
                    serde_json::from_str(&raw).context("parsing custom problem spec")?;
                Ok(Some(spec))
            }
            _ => Ok(None),
        }
    }
}
