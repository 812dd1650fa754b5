//! Run configuration: a JSON-serializable description that, together with
//! the code version, reproduces a run bit-identically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{load_dataset, synth_dataset, Dataset, DatasetSpec, SyntheticSpec};
use crate::engine::{theorem_presets, EngineParams, PresetSource};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, NoiseMode};
use crate::losses::ProblemKind;
use crate::regret::RunMode;
use crate::scalar::Scalar;
use crate::truncation::{GravitySchedule, TruncationParams};

/// Where `η`, `ε_IP`, `ε_norm` come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum PresetChoice<S> {
    /// Derived from the per-problem analysis at the config's `T`, `C`, `δ`.
    Theorem,
    Manual {
        eta: S,
        eps_ip: S,
        eps_norm: S,
    },
}

/// One reproducible run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Deserialize<'de>"))]
pub struct RunConfig<S> {
    pub kind: ProblemKind,
    /// Number of online rounds; 0 means "all examples in a file dataset".
    pub t_rounds: usize,
    pub c_bound: S,
    pub delta: S,
    /// Constant gravity `g`.
    pub gravity: S,
    pub theta: S,
    pub preset: PresetChoice<S>,
    pub dataset: DatasetSpec<S>,
    pub seed: u64,
    #[serde(default)]
    pub audit: bool,
    #[serde(default)]
    pub noise: NoiseMode,
    #[serde(default)]
    pub mode: RunModeChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<S>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logistic_step_factor: Option<S>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

/// Serializable twin of [`RunMode`] with a default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RunModeChoice {
    #[default]
    QuantumEmulated,
    ClassicalExact,
}

impl From<RunModeChoice> for RunMode {
    fn from(value: RunModeChoice) -> Self {
        match value {
            RunModeChoice::QuantumEmulated => RunMode::QuantumEmulated,
            RunModeChoice::ClassicalExact => RunMode::ClassicalExact,
        }
    }
}

impl<S: Scalar> RunConfig<S> {
    /// A synthetic-data config with theorem presets; the usual starting
    /// point.
    pub fn synthetic(kind: ProblemKind, t_rounds: usize, dimension: usize) -> Self {
        RunConfig {
            kind,
            t_rounds,
            c_bound: S::one(),
            delta: S::from_f64_const(0.1),
            gravity: S::from_f64_const(0.1),
            theta: S::one(),
            preset: PresetChoice::Theorem,
            dataset: DatasetSpec::Synthetic(SyntheticSpec::new(kind, dimension, t_rounds)),
            seed: 0,
            audit: false,
            noise: NoiseMode::Full,
            mode: RunModeChoice::QuantumEmulated,
            zeta: None,
            logistic_step_factor: None,
            period_k: None,
            output_dir: None,
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.dataset {
            DatasetSpec::File { dimension, .. } => *dimension,
            DatasetSpec::Synthetic(spec) => spec.dimension,
        }
    }

    /// Loads or generates the dataset this config describes.
    pub fn resolve_dataset(&self) -> Result<Dataset<S>> {
        match &self.dataset {
            DatasetSpec::File {
                path,
                format,
                dimension,
                c_bound,
            } => {
                let mut ds = load_dataset(Path::new(path), *format, *dimension)?;
                crate::data::normalize_to_ball(&mut ds.examples, *c_bound)?;
                Ok(ds)
            }
            DatasetSpec::Synthetic(spec) => {
                let mut rng = crate::estimators::derive_rng(self.seed, u64::MAX);
                synth_dataset(spec, &mut rng)
            }
        }
    }

    /// The effective round count given a loaded dataset.
    pub fn effective_rounds(&self, dataset_len: usize) -> usize {
        if self.t_rounds == 0 {
            dataset_len
        } else {
            self.t_rounds
        }
    }

    /// Builds engine parameters for `t_rounds` rounds at the config's
    /// dimension.
    pub fn engine_params(&self, t_rounds: usize) -> Result<EngineParams<S>> {
        let (eta, eps_ip, eps_norm) = match self.preset {
            PresetChoice::Theorem => {
                let p = theorem_presets(self.kind, t_rounds, self.c_bound, self.delta)?;
                (p.eta, p.eps_ip, p.eps_norm)
            }
            PresetChoice::Manual {
                eta,
                eps_ip,
                eps_norm,
            } => (eta, eps_ip, eps_norm),
        };

        let mut trunc =
            TruncationParams::new(self.theta, eta, GravitySchedule::constant(self.gravity))?;
        if let Some(k) = self.period_k {
            trunc = trunc.with_period_k(k)?;
        }
        if let Some(f) = self.logistic_step_factor {
            trunc = trunc.with_logistic_step_factor(f)?;
        }

        let mut est = EstimatorSpec::new(eps_ip, eps_norm, self.delta, self.seed)?;
        if let Some(z) = self.zeta {
            est = est.with_zeta(z)?;
        }
        est = est.with_noise(self.noise);

        let mut params = EngineParams::manual(
            self.kind,
            trunc,
            est,
            t_rounds,
            self.dimension(),
            self.c_bound,
        )?;
        params.preset_source = match self.preset {
            PresetChoice::Theorem => PresetSource::Theorem,
            PresetChoice::Manual { .. } => PresetSource::Manual,
        };
        Ok(params)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.dataset, DatasetSpec::Synthetic(_)) && self.t_rounds == 0 {
            return Err(Error::invalid_param(
                "t_rounds",
                "synthetic datasets need an explicit round count",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_semantically_identical() {
        let mut config = RunConfig::<f64>::synthetic(ProblemKind::Logistic, 64, 16);
        config.audit = true;
        config.zeta = Some(0.3);
        config.preset = PresetChoice::Manual {
            eta: 0.05,
            eps_ip: 0.02,
            eps_norm: 0.04,
        };
        let json = config.to_json_pretty().unwrap();
        let back = RunConfig::<f64>::from_json(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn theorem_preset_configs_build_engine_params() {
        let config = RunConfig::<f64>::synthetic(ProblemKind::Squared, 100, 8);
        let params = config.engine_params(100).unwrap();
        assert_eq!(params.preset_source, PresetSource::Theorem);
        assert!((params.trunc.eta - 0.1).abs() < 1e-15);
        assert!((params.est.eps_ip - 0.05).abs() < 1e-15);
    }

    #[test]
    fn synthetic_config_reproduces_dataset() {
        let config = RunConfig::<f64>::synthetic(ProblemKind::Hinge, 20, 6);
        let a = config.resolve_dataset().unwrap();
        let b = config.resolve_dataset().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_rounds_invalid_for_synthetic() {
        let mut config = RunConfig::<f64>::synthetic(ProblemKind::Hinge, 20, 6);
        config.t_rounds = 0;
        assert!(config.validate().is_err());
    }
}
