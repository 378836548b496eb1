use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Policy, RapsParams, RunOptions, SharingScope};
use crate::bandit_core::DEFAULT_EXPLORATION;
use crate::error::{Error, Result};
use crate::scm::{GeneratorParams, RewardKind};

/// Where the instance of each repetition comes from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceSource {
    /// A fresh random instance per repetition.
    #[default]
    Redraw,
    /// One random instance shared by all repetitions.
    Fixed,
    /// An instance loaded from a JSON file.
    Path(PathBuf),
}

/// Everything that determines an experiment's output.
///
/// The JSON config file mirrors this struct field for field; omitted
/// optional fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub reps: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Policy>,
    /// Edge probability of the random graph; `None` means `2/n`.
    #[serde(default)]
    pub edge_prob: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_reward_kind")]
    pub reward_kind: RewardKind,
    #[serde(default = "default_raps_epsilon")]
    pub raps_epsilon: f64,
    /// Parent-search rounds per value; `None` means `ceil(ln 10 / eps^2)`.
    #[serde(default)]
    pub raps_probes: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub record_actions: bool,
    #[serde(default = "default_exploration")]
    pub exploration: f64,
    #[serde(default)]
    pub sharing: SharingScope,
    #[serde(default)]
    pub full_action_space: bool,
    /// All policies of a repetition share one instance.
    #[serde(default = "default_true")]
    pub paired: bool,
    #[serde(default)]
    pub force_raps: bool,
    #[serde(default)]
    pub instance: InstanceSource,
    /// Worker threads; `None` uses the rayon default. Never affects output.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_beta() -> f64 {
    0.7
}

fn default_reward_kind() -> RewardKind {
    RewardKind::Bernoulli
}

fn default_raps_epsilon() -> f64 {
    0.05
}

fn default_exploration() -> f64 {
    DEFAULT_EXPLORATION
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// A config with every optional knob at its default.
    pub fn new(n: usize, l: usize, k: usize, m: usize, horizon: u64, reps: usize, algorithms: Vec<Policy>) -> Self {
        ExperimentConfig {
            n,
            l,
            k,
            m,
            horizon,
            reps,
            base_seed: 0,
            algorithms,
            edge_prob: None,
            beta: default_beta(),
            reward_kind: default_reward_kind(),
            raps_epsilon: default_raps_epsilon(),
            raps_probes: None,
            out: None,
            record_actions: false,
            exploration: DEFAULT_EXPLORATION,
            sharing: SharingScope::default(),
            full_action_space: false,
            paired: true,
            force_raps: false,
            instance: InstanceSource::default(),
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.reps == 0 {
            return bad("reps must be >= 1".into());
        }
        if self.horizon == 0 {
            return bad("T must be >= 1".into());
        }
        if self.m == 0 || self.m > self.n {
            return bad(format!("need 1 <= m <= n, got m = {}, n = {}", self.m, self.n));
        }
        if self.k > self.n {
            return bad(format!("need k <= n, got k = {}, n = {}", self.k, self.n));
        }
        if self.l == 0 {
            return bad("l must be >= 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms requested".into());
        }
        if !(self.exploration.is_finite() && self.exploration >= 0.0) {
            return bad(format!("invalid UCB constant {}", self.exploration));
        }
        if !(self.raps_epsilon.is_finite() && self.raps_epsilon > 0.0) {
            return bad(format!("invalid RAPS epsilon {}", self.raps_epsilon));
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        Ok(())
    }

    /// The config with defaults that depend on other fields filled in.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.edge_prob = Some(self.edge_prob());
        c.raps_probes = Some(self.run_options().raps.probes_per_value());
        c
    }

    pub fn edge_prob(&self) -> f64 {
        self.edge_prob.unwrap_or_else(|| {
            if self.n == 0 {
                0.0
            } else {
                (2.0 / self.n as f64).min(1.0)
            }
        })
    }

    pub fn generator(&self) -> GeneratorParams {
        GeneratorParams {
            n: self.n,
            cardinality: self.l,
            k: self.k,
            edge_prob: self.edge_prob(),
            beta: self.beta,
            reward_kind: self.reward_kind,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            exploration: self.exploration,
            record_actions: self.record_actions,
            sharing: self.sharing,
            full_action_space: self.full_action_space,
            raps: RapsParams {
                epsilon: self.raps_epsilon,
                probes: self.raps_probes,
            },
        }
    }

    /// Reads a config file, or the `config` member of a results sidecar.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json_err = |source| Error::Json {
            path: path.to_path_buf(),
            source,
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        let config: ExperimentConfig = serde_json::from_value(value).map_err(json_err)?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in_from_minimal_json() {
        let json = r#"{"n": 8, "l": 3, "k": 1, "m": 3, "T": 100, "reps": 2,
                       "base_seed": 7, "algorithms": ["empknown+", "ucb"]}"#;
        let c: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.beta, 0.7);
        assert_eq!(c.edge_prob(), 0.25);
        assert_eq!(c.raps_epsilon, 0.05);
        assert!(c.paired);
        assert_eq!(c.instance, InstanceSource::Redraw);
        assert_eq!(c.algorithms, vec![Policy::EmpKnownPlus, Policy::StandardUcb]);
        assert_eq!(c.resolved().raps_probes, Some(922));
    }

    #[test]
    fn unknown_fields_and_bad_values_rejected() {
        let json = r#"{"n": 8, "l": 3, "k": 1, "m": 3, "T": 100, "reps": 2,
                       "base_seed": 7, "algorithms": ["ucb"], "colour": 1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(json).is_err());
        let mut c = ExperimentConfig::new(8, 3, 1, 3, 100, 2, vec![Policy::StandardUcb]);
        assert!(c.validate().is_ok());
        c.m = 9;
        assert!(c.validate().is_err());
        c.m = 3;
        c.reps = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let mut c = ExperimentConfig::new(5, 2, 2, 3, 1000, 4, Policy::ALL.to_vec());
        c.instance = InstanceSource::Path("inst.json".into());
        c.edge_prob = Some(0.3);
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
