//! Experiment configuration: a JSON document plus `key=value` overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use peerpred_core::model::{EffortModel, Setting};
use peerpred_core::{Mechanism, Strategy};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("override `{0}` is not of the form key=value")]
    Override(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid { key: key.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MeasurementIntegrity,
    MetricVariance,
    Deviation,
    RankingQuality,
    ValidateEstimation,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MeasurementIntegrity => "measurement_integrity",
            ExperimentKind::MetricVariance => "metric_variance",
            ExperimentKind::Deviation => "deviation",
            ExperimentKind::RankingQuality => "ranking_quality",
            ExperimentKind::ValidateEstimation => "validate_estimation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingConfig {
    pub effort: String,
    #[serde(default)]
    pub biased: bool,
}

impl Default for SettingConfig {
    fn default() -> Self {
        SettingConfig { effort: "continuous".into(), biased: true }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

fn default_replications() -> u32 {
    100
}
fn default_inner() -> u32 {
    50
}
fn default_students() -> usize {
    100
}
fn default_assignments() -> usize {
    10
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub setting: SettingConfig,
    #[serde(default)]
    pub mechanisms: Vec<String>,
    /// A single name or a list; deviation and ranking runs repeat per strategy.
    #[serde(default, alias = "strategy", deserialize_with = "one_or_many")]
    pub strategies: Vec<String>,
    /// Active graders (binary integrity) or strategic agents (deviation,
    /// ranking quality). Empty means the experiment's default sweep.
    #[serde(default)]
    pub sweep: Vec<u32>,
    #[serde(default = "default_replications")]
    pub replications: u32,
    /// Inner loop size of the variance experiment.
    #[serde(default = "default_inner")]
    pub inner_replications: u32,
    #[serde(default = "default_students")]
    pub n_students: usize,
    #[serde(default = "default_assignments")]
    pub n_assignments: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        serde_json::from_value(serde_json::json!({ "experiment": experiment })).expect("defaults deserialize")
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_json(&text, &[])
    }

    /// Parses `text` after applying `overrides` of the form `key=value`
    /// (`key` may be dotted, e.g. `setting.biased`). Values are read as JSON
    /// when possible and as plain strings otherwise.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc: Value = serde_json::from_str(text)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Ok(serde_json::from_value(doc)?)
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = serde_json::to_string(self)?;
        Self::from_json(&text, overrides)
    }

    pub fn setting(&self) -> Result<Setting, ConfigError> {
        let effort = EffortModel::from_str(&self.setting.effort).map_err(|e| invalid("setting.effort", e))?;
        Ok(Setting { effort, biased: self.setting.biased })
    }

    /// Mechanisms by name; the experiment's default set when none are listed.
    pub fn mechanisms(&self) -> Result<Vec<Mechanism>, ConfigError> {
        if self.mechanisms.is_empty() {
            return Ok(default_mechanisms(self.experiment));
        }
        self.mechanisms
            .iter()
            .enumerate()
            .map(|(i, m)| m.parse().map_err(|e| invalid(format!("mechanisms[{i}]"), e)))
            .collect()
    }

    /// Strategies by name; every deviation from truthfulness when none are listed.
    pub fn strategies(&self) -> Result<Vec<Strategy>, ConfigError> {
        if self.strategies.is_empty() {
            return Ok(Strategy::DEVIATIONS.to_vec());
        }
        self.strategies
            .iter()
            .enumerate()
            .map(|(i, s)| s.parse().map_err(|e| invalid(format!("strategies[{i}]"), e)))
            .collect()
    }

    pub fn sweep(&self) -> Result<Vec<u32>, ConfigError> {
        let sweep = if self.sweep.is_empty() { default_sweep(self.experiment, &self.setting) } else { self.sweep.clone() };
        let n = self.n_students as u32;
        if let Some(bad) = sweep.iter().find(|&&v| v > n) {
            return Err(invalid("sweep", format!("{bad} exceeds the population of {n}")));
        }
        if self.experiment == ExperimentKind::Deviation && sweep.contains(&n) {
            return Err(invalid("sweep", "deviation needs at least one truthful agent to flip"));
        }
        Ok(sweep)
    }

    /// Checks every field that can be wrong after parsing.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let setting = self.setting()?;
        self.mechanisms()?;
        self.strategies()?;
        self.sweep()?;
        if self.replications == 0 {
            return Err(invalid("replications", "must be positive"));
        }
        if self.inner_replications == 0 {
            return Err(invalid("inner_replications", "must be positive"));
        }
        if self.n_assignments == 0 {
            return Err(invalid("n_assignments", "must be positive"));
        }
        if self.n_students < 8 || !self.n_students.is_multiple_of(4) {
            return Err(invalid("n_students", "must be a multiple of 4 and at least 8"));
        }
        match self.experiment {
            ExperimentKind::MetricVariance | ExperimentKind::Deviation | ExperimentKind::RankingQuality
                if setting.effort != EffortModel::Continuous =>
            {
                Err(invalid("setting.effort", "this experiment ranks by continuous effort"))
            }
            _ => Ok(()),
        }
    }
}

fn apply_override(doc: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::Override(spec.into()))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()));
    let mut node = doc;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        let map = node.as_object_mut().ok_or_else(|| invalid(key, "not an object"))?;
        if parts.peek().is_none() {
            map.insert(part.into(), value);
            return Ok(());
        }
        node = map.entry(part).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(ConfigError::Override(spec.into()))
}

pub fn default_mechanisms(experiment: ExperimentKind) -> Vec<Mechanism> {
    use peerpred_core::Divergence::SquaredHellinger;
    match experiment {
        ExperimentKind::MeasurementIntegrity => Mechanism::all(),
        ExperimentKind::MetricVariance | ExperimentKind::Deviation | ExperimentKind::RankingQuality => {
            vec![Mechanism::Mse, Mechanism::MseP, Mechanism::PhiDivP(SquaredHellinger)]
        }
        ExperimentKind::ValidateEstimation => Vec::new(),
    }
}

fn default_sweep(experiment: ExperimentKind, setting: &SettingConfig) -> Vec<u32> {
    match experiment {
        ExperimentKind::MeasurementIntegrity if setting.effort == "binary" => (1..=9).map(|i| i * 10).collect(),
        ExperimentKind::Deviation => (1..=9).map(|i| i * 10).collect(),
        ExperimentKind::RankingQuality => (0..=10).map(|i| i * 10).collect(),
        _ => Vec::new(),
    }
}
