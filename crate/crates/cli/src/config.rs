//! Experiment config files. The schema is documented in `CONFIG.md`.

use std::path::Path;

use privsprt_core::simulation::{calibrate_thresholds, NoiseSource, DEFAULT_PROBE_TRIALS};
use privsprt_core::sprt::default_t_max;
use privsprt_core::{ExperimentConfig, HypothesisPair, SprtThresholds, TruncationSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, FieldError};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_DELTA: f64 = 1e-5;
/// Placeholder truncation for noiseless tests, which ignore it.
const NOISELESS_TRUNCATION: f64 = 1.0;

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_true() -> bool {
    true
}

/// Threshold search targets, used when no thresholds are given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub target_type1: f64,
    pub target_type2: f64,
    #[serde(default = "default_true")]
    pub symmetric: bool,
    #[serde(default)]
    pub n_per_probe: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pair: HypothesisPair,
    /// Truncation level `A`; required for noisy tests.
    #[serde(default)]
    pub truncation: Option<f64>,
    pub noise: NoiseSource,
    #[serde(default)]
    pub thresholds: Option<SprtThresholds>,
    #[serde(default)]
    pub calibration: Option<CalibrationSpec>,
    #[serde(default = "default_trials")]
    pub n_trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub t_max: Option<u64>,
    /// `delta` of the privacy report; defaults to the noise `delta` or 1e-5.
    #[serde(default)]
    pub privacy_delta: Option<f64>,
}

fn positive_finite(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::field("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every field-level problem at once.
    pub fn validate(&self) -> CliResult<()> {
        let mut errs = Vec::new();
        let mut push = |field: &str, reason: String| {
            errs.push(FieldError {
                field: field.to_string(),
                reason,
            })
        };
        if let Err(privsprt_core::Error::InvalidParameter { name, reason }) = self.pair.validate() {
            push(&format!("pair.{name}"), reason);
        }
        match self.truncation {
            Some(a) if !positive_finite(a) => push("truncation", format!("must be positive and finite, got {a}")),
            None if self.noise != NoiseSource::None => push("truncation", "is required for noisy tests".into()),
            _ => {}
        }
        match self.noise {
            NoiseSource::Gaussian { epsilon_prime, delta } => {
                if !positive_finite(epsilon_prime) {
                    push("noise.epsilon_prime", format!("must be positive and finite, got {epsilon_prime}"));
                }
                if !(delta > 0.0 && delta < 1.0) {
                    push("noise.delta", format!("must lie in (0, 1), got {delta}"));
                }
            }
            NoiseSource::Explicit { sigma1, sigma2 } => {
                for (name, s) in [("noise.sigma1", sigma1), ("noise.sigma2", sigma2)] {
                    if !(s >= 0.0 && s.is_finite()) {
                        push(name, format!("must be non-negative and finite, got {s}"));
                    }
                }
            }
            NoiseSource::Laplace { epsilon } => {
                if !positive_finite(epsilon) {
                    push("noise.epsilon", format!("must be positive and finite, got {epsilon}"));
                }
            }
            NoiseSource::None => {}
        }
        match (&self.thresholds, &self.calibration) {
            (Some(t), None) => {
                for (name, v) in [("thresholds.a", t.a), ("thresholds.b", t.b)] {
                    if !positive_finite(v) {
                        push(name, format!("must be positive and finite, got {v}"));
                    }
                }
            }
            (None, Some(c)) => {
                for (name, v) in [
                    ("calibration.target_type1", c.target_type1),
                    ("calibration.target_type2", c.target_type2),
                ] {
                    if !(v > 0.0 && v < 0.5) {
                        push(name, format!("must lie in (0, 0.5), got {v}"));
                    }
                }
                if c.n_per_probe == Some(0) {
                    push("calibration.n_per_probe", "must be at least 1".into());
                }
            }
            (Some(_), Some(_)) => push("thresholds", "give either `thresholds` or `calibration`, not both".into()),
            (None, None) => push("thresholds", "give either `thresholds` or `calibration`".into()),
        }
        if self.n_trials == 0 {
            push("n_trials", "must be at least 1".into());
        }
        if self.t_max == Some(0) {
            push("t_max", "must be at least 1".into());
        }
        if let Some(d) = self.privacy_delta {
            if !(d > 0.0 && d < 1.0) {
                push("privacy_delta", format!("must lie in (0, 1), got {d}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errs))
        }
    }

    pub fn truncation_spec(&self) -> CliResult<TruncationSpec> {
        Ok(TruncationSpec::new(self.truncation.unwrap_or(NOISELESS_TRUNCATION))?)
    }

    pub fn report_delta(&self) -> f64 {
        self.privacy_delta.unwrap_or(match self.noise {
            NoiseSource::Gaussian { delta, .. } => delta,
            _ => DEFAULT_DELTA,
        })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self
    }

    /// Build the experiment, calibrating thresholds first when asked to.
    pub fn resolve(&self) -> CliResult<Resolved> {
        let trunc = self.truncation_spec()?;
        let (thresholds, calibration) = match (&self.thresholds, &self.calibration) {
            (Some(t), _) => (SprtThresholds::new(t.a, t.b)?, None),
            (None, Some(c)) => {
                // The cap is fixed from a nominal threshold so probes share it.
                let nominal = SprtThresholds::symmetric((1.0 / c.target_type1.min(c.target_type2)).ln())?;
                let t_max = self.t_max.unwrap_or_else(|| default_t_max(nominal, &self.pair));
                let template = self.noise.test_config(nominal, trunc, t_max)?;
                let r = calibrate_thresholds(
                    &self.pair,
                    &template,
                    c.target_type1,
                    c.target_type2,
                    c.n_per_probe.unwrap_or(DEFAULT_PROBE_TRIALS),
                    c.symmetric,
                    self.seed,
                )?;
                (r.thresholds, Some(r))
            }
            (None, None) => return Err(CliError::field("thresholds", "missing")),
        };
        let experiment =
            ExperimentConfig::new(self.pair.clone(), thresholds, trunc, self.noise, self.t_max, self.n_trials, self.seed)?;
        Ok(Resolved {
            experiment,
            calibration,
        })
    }
}

pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub calibration: Option<privsprt_core::simulation::CalibrationResult>,
}
