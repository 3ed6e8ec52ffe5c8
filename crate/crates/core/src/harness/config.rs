use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{IsacError, Result};
use crate::model::SystemConfig;

/// Which design each trial computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Augmented Tchebycheff design at every sweep weight.
    #[default]
    Moop,
    /// Normalized weighted-sum baseline at every sweep weight.
    WeightedSum,
    /// Sum-rate design only (reported at omega1 = 1).
    Soop1,
    /// Beampattern design only (reported at omega1 = 0).
    Soop2,
}

/// Grid of the swept quantities. Every combination is run for every trial;
/// an absent list keeps the single value of the system configuration (or the
/// interior weight grid for `omega1`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub omega1: Option<Vec<f64>>,
    pub p_max_dbm: Option<Vec<f64>>,
    pub n_tx: Option<Vec<usize>>,
}

/// A Monte-Carlo run: the system parameters plus orchestration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub n_trials: usize,
    pub sweep: SweepSpec,
    pub scheme: Scheme,
    pub out_dir: PathBuf,
    /// Worker threads; 0 picks one per core.
    pub jobs: usize,
}

pub const DEFAULT_TRIALS: usize = 1000;

/// Keys of a config file that are not part of [`SystemConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunFields {
    n_trials: usize,
    sweep: SweepSpec,
    scheme: Scheme,
    out_dir: PathBuf,
    jobs: usize,
}

impl Default for RunFields {
    fn default() -> Self {
        RunFields {
            n_trials: DEFAULT_TRIALS,
            sweep: SweepSpec::default(),
            scheme: Scheme::default(),
            out_dir: PathBuf::from("results"),
            jobs: 0,
        }
    }
}

const RUN_KEYS: [&str; 5] = ["n_trials", "sweep", "scheme", "out_dir", "jobs"];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_parts(SystemConfig::default(), RunFields::default())
    }
}

impl RunConfig {
    fn from_parts(system: SystemConfig, run: RunFields) -> Self {
        RunConfig {
            system,
            n_trials: run.n_trials,
            sweep: run.sweep,
            scheme: run.scheme,
            out_dir: run.out_dir,
            jobs: run.jobs,
        }
    }

    /// Parses and validates a JSON document. Missing keys take their
    /// defaults; unknown keys and type errors are reported with their path.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| schema_error("", e))?;
        let Value::Object(mut map) = value else {
            return Err(IsacError::InvalidConfig(vec!["(root): expected a JSON object".into()]));
        };
        let mut run_map = Map::new();
        for key in RUN_KEYS {
            if let Some(v) = map.remove(key) {
                run_map.insert(key.to_string(), v);
            }
        }
        let system: SystemConfig =
            serde_path_to_error::deserialize(Value::Object(map)).map_err(|e| path_error(e.path().to_string(), e.inner()))?;
        let run: RunFields = serde_path_to_error::deserialize(Value::Object(run_map))
            .map_err(|e| path_error(e.path().to_string(), e.inner()))?;
        let cfg = RunConfig::from_parts(system, run);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Value {
        let mut map = match serde_json::to_value(&self.system) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        };
        let run = RunFields {
            n_trials: self.n_trials,
            sweep: self.sweep.clone(),
            scheme: self.scheme,
            out_dir: self.out_dir.clone(),
            jobs: self.jobs,
        };
        if let Ok(Value::Object(m)) = serde_json::to_value(run) {
            map.extend(m);
        }
        Value::Object(map)
    }

    /// Lists every violated invariant.
    pub fn validate(&self) -> Result<()> {
        let mut issues = match self.system.validate() {
            Ok(()) => Vec::new(),
            Err(IsacError::InvalidConfig(v)) => v,
            Err(e) => vec![e.to_string()],
        };
        if self.n_trials == 0 {
            issues.push("n_trials: must be at least 1".into());
        }
        if let Some(w) = &self.sweep.omega1 {
            if w.is_empty() {
                issues.push("sweep.omega1: grid is empty".into());
            }
            if w.iter().any(|v| !(0.0..=1.0).contains(v)) {
                issues.push("sweep.omega1: weights must lie in [0, 1]".into());
            }
        }
        if let Some(p) = &self.sweep.p_max_dbm {
            if p.is_empty() {
                issues.push("sweep.p_max_dbm: grid is empty".into());
            }
            if p.iter().any(|v| !v.is_finite()) {
                issues.push("sweep.p_max_dbm: values must be finite".into());
            }
        }
        if let Some(n) = &self.sweep.n_tx {
            if n.is_empty() {
                issues.push("sweep.n_tx: grid is empty".into());
            }
            if n.contains(&0) {
                issues.push("sweep.n_tx: values must be at least 1".into());
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(IsacError::InvalidConfig(issues))
        }
    }

    pub fn omegas(&self) -> Vec<f64> {
        match self.scheme {
            Scheme::Soop1 => vec![1.0],
            Scheme::Soop2 => vec![0.0],
            _ => self.sweep.omega1.clone().unwrap_or_else(|| self.system.weight_grid()),
        }
    }

    pub fn p_max_grid(&self) -> Vec<f64> {
        self.sweep.p_max_dbm.clone().unwrap_or_else(|| vec![self.system.p_max_dbm])
    }

    pub fn n_tx_grid(&self) -> Vec<usize> {
        self.sweep.n_tx.clone().unwrap_or_else(|| vec![self.system.n_tx])
    }
}

fn path_error(path: String, e: &serde_json::Error) -> IsacError {
    let path = if path == "." { "(root)".to_string() } else { path };
    IsacError::InvalidConfig(vec![format!("{path}: {e}")])
}

fn schema_error(path: &str, e: serde_json::Error) -> IsacError {
    path_error(path.to_string(), &e)
}

/// Reads a run configuration from a JSON file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IsacError::io(path, e))?;
    RunConfig::from_json_str(&text).map_err(|e| match e {
        IsacError::InvalidConfig(issues) => {
            IsacError::InvalidConfig(issues.into_iter().map(|i| format!("{}: {i}", path.display())).collect())
        }
        other => other,
    })
}
