//! Experiment configuration: a JSON file naming an experiment from the
//! catalog, the model to run it on, and the sampling budget.

use std::path::{Path, PathBuf};

use levylab_core::{Dynamics, LevyModel, ModelError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("field `model`: {0}")]
    Model(#[from] ModelError),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
}

fn field_err(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, reason: reason.into() }
}

/// Optional two-sided window lengths, in time units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HorizonsConfig {
    pub backward: f64,
    pub forward: f64,
}

/// On-disk experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Name from the experiment catalog (`levylab list`).
    pub experiment: String,
    /// Model dynamics: drift, Gaussian coefficient, exponential jump parts.
    pub model: Dynamics,
    /// Master seed; every ensemble derives its own substream from it.
    pub seed: u64,
    /// Main ensemble size.
    pub replicates: usize,
    /// Simulation grid step.
    pub step: f64,
    /// Starting levels for conditioned runs, strictly decreasing, all < 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_ladder: Option<Vec<f64>>,
    /// Positive levels for tail-frequency and crossing checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    /// Two-sided window lengths where an experiment needs them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizons: Option<HorizonsConfig>,
    /// Output directory for results.csv, summary.json and ensemble CSVs.
    pub output: PathBuf,
}

/// A parsed and checked configuration with the model promoted to a
/// validated [`LevyModel`].
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub experiment: String,
    pub model: LevyModel,
    pub seed: u64,
    pub replicates: usize,
    pub step: f64,
    pub x_ladder: Option<Vec<f64>>,
    pub levels: Option<Vec<f64>>,
    pub horizons: Option<HorizonsConfig>,
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(self) -> Result<ValidatedConfig, ConfigError> {
        if self.experiment.is_empty() {
            return Err(field_err("experiment", "must not be empty"));
        }
        if self.replicates < 100 {
            return Err(field_err(
                "replicates",
                format!("must be at least 100, got {}", self.replicates),
            ));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(field_err("step", format!("must be positive, got {}", self.step)));
        }
        if let Some(ladder) = &self.x_ladder {
            if ladder.is_empty() {
                return Err(field_err("x_ladder", "must not be empty when present"));
            }
            if ladder.iter().any(|x| !(x.is_finite() && *x < 0.0)) {
                return Err(field_err("x_ladder", "entries must be finite and negative"));
            }
            if ladder.windows(2).any(|w| w[1] >= w[0]) {
                return Err(field_err("x_ladder", "entries must be strictly decreasing"));
            }
        }
        if let Some(levels) = &self.levels {
            if levels.is_empty() {
                return Err(field_err("levels", "must not be empty when present"));
            }
            if levels.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
                return Err(field_err("levels", "entries must be finite and positive"));
            }
        }
        if let Some(h) = &self.horizons {
            if !(h.backward > 0.0 && h.backward.is_finite()) {
                return Err(field_err(
                    "horizons",
                    format!("backward must be positive, got {}", h.backward),
                ));
            }
            if !(h.forward > 0.0 && h.forward.is_finite()) {
                return Err(field_err(
                    "horizons",
                    format!("forward must be positive, got {}", h.forward),
                ));
            }
        }
        if self.output.as_os_str().is_empty() {
            return Err(field_err("output", "must name a directory"));
        }
        let model = LevyModel::validate(self.model)?;
        Ok(ValidatedConfig {
            experiment: self.experiment,
            model,
            seed: self.seed,
            replicates: self.replicates,
            step: self.step,
            x_ladder: self.x_ladder,
            levels: self.levels,
            horizons: self.horizons,
            output: self.output,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            experiment: "sup_exponential".into(),
            model: Dynamics::brownian(-1.0, 1.0),
            seed: 7,
            replicates: 1000,
            step: 0.01,
            x_ladder: None,
            levels: None,
            horizons: None,
            output: PathBuf::from("out"),
        }
    }

    #[test]
    fn accepts_a_sound_config() {
        assert!(base().validate().is_ok());
    }

    #[test]
    fn rejects_small_replicate_counts_naming_the_field() {
        let mut cfg = base();
        cfg.replicates = 10;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("replicates"), "{err}");
    }

    #[test]
    fn rejects_non_positive_step_naming_the_field() {
        let mut cfg = base();
        cfg.step = 0.0;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("step"), "{err}");
    }

    #[test]
    fn rejects_unsorted_ladder_naming_the_field() {
        let mut cfg = base();
        cfg.x_ladder = Some(vec![-2.0, -1.0]);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("x_ladder"), "{err}");
    }

    #[test]
    fn rejects_positive_ladder_entries() {
        let mut cfg = base();
        cfg.x_ladder = Some(vec![1.0, -1.0]);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("x_ladder"), "{err}");
    }

    #[test]
    fn rejects_models_with_nonnegative_mean() {
        let mut cfg = base();
        cfg.model = Dynamics::brownian(1.0, 1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = base();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.experiment, cfg.experiment);
        assert_eq!(back.replicates, cfg.replicates);
    }
}
