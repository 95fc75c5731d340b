//! Noisy above-threshold tests and the private SPRT built from two of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{laplace_baseline_scales, privsprt_sigmas, NoiseMechanism};
use crate::models::{Hypothesis, HypothesisPair, PreparedPair, TruncationSpec};
use crate::rng::{RngStream, TrialStreams};
use crate::sprt::{self, log_weight_for, Decision, SprtThresholds, TrialOptions, TrialOutcome};

/// Which test a [`PrivTestConfig`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    /// Gaussian noise on thresholds and clipped statistic.
    GaussianPrivSprt,
    /// Laplace noise on thresholds and clipped statistic.
    LaplaceAboveThresh,
    /// Wald's SPRT on the raw statistic; noise scales and truncation ignored.
    NonPrivate,
}

/// Parameters of one private (or baseline) sequential test.
///
/// `sigma1` and `sigma2` are the threshold and query noise scales: standard
/// deviations in Gaussian mode, Laplace scales in Laplace mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivTestConfig {
    pub thresholds: SprtThresholds,
    pub trunc: TruncationSpec,
    pub sigma1: f64,
    pub sigma2: f64,
    pub t_max: u64,
    pub mode: TestMode,
}

impl PrivTestConfig {
    pub fn gaussian(
        thresholds: SprtThresholds,
        trunc: TruncationSpec,
        sigma1: f64,
        sigma2: f64,
        t_max: u64,
    ) -> Result<Self> {
        let cfg = Self {
            thresholds,
            trunc,
            sigma1,
            sigma2,
            t_max,
            mode: TestMode::GaussianPrivSprt,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Gaussian test with noise calibrated to `(eps_prime, delta)`.
    pub fn calibrated_gaussian(
        thresholds: SprtThresholds,
        trunc: TruncationSpec,
        eps_prime: f64,
        delta: f64,
        t_max: u64,
    ) -> Result<Self> {
        let (s1, s2) = privsprt_sigmas(eps_prime, delta, trunc.value())?;
        Self::gaussian(thresholds, trunc, s1, s2, t_max)
    }

    /// Laplace baseline with scales calibrated to total budget `epsilon`.
    pub fn laplace(thresholds: SprtThresholds, trunc: TruncationSpec, epsilon: f64, t_max: u64) -> Result<Self> {
        let (s1, s2) = laplace_baseline_scales(epsilon, trunc.value())?;
        let cfg = Self {
            thresholds,
            trunc,
            sigma1: s1,
            sigma2: s2,
            t_max,
            mode: TestMode::LaplaceAboveThresh,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn non_private(thresholds: SprtThresholds, trunc: TruncationSpec, t_max: u64) -> Result<Self> {
        let cfg = Self {
            thresholds,
            trunc,
            sigma1: 0.0,
            sigma2: 0.0,
            t_max,
            mode: TestMode::NonPrivate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_thresholds(&self, thresholds: SprtThresholds) -> Self {
        Self { thresholds, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        for (name, v) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        if self.t_max == 0 {
            return Err(Error::param("t_max", "must be at least 1"));
        }
        Ok(())
    }

    /// Threshold and query mechanisms implied by the mode.
    pub fn mechanisms(&self) -> (NoiseMechanism, NoiseMechanism) {
        match self.mode {
            TestMode::GaussianPrivSprt => (
                NoiseMechanism::Gaussian { sigma: self.sigma1 },
                NoiseMechanism::Gaussian { sigma: self.sigma2 },
            ),
            TestMode::LaplaceAboveThresh => (
                NoiseMechanism::Laplace { scale: self.sigma1 },
                NoiseMechanism::Laplace { scale: self.sigma2 },
            ),
            TestMode::NonPrivate => (NoiseMechanism::None, NoiseMechanism::None),
        }
    }

    pub fn is_private(&self) -> bool {
        self.mode != TestMode::NonPrivate && self.sigma1 > 0.0 && self.sigma2 > 0.0
    }
}

/// One answer of an above-threshold test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Top,
    Bottom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AboveThreshOutcome {
    /// 1-based index of the first `Top`, if any.
    pub stop_index: Option<u64>,
    pub answers: Vec<Answer>,
}

/// Generalized above-noisy-threshold test.
///
/// The threshold is perturbed once by `m1`; every query by `m2`. Emits
/// `Bottom` until a noisy query exceeds the noisy threshold, then `Top` and
/// halts. Returns no stop index when `t_max` queries (or the stream) run out.
pub fn gen_above_thresh<I>(
    queries: I,
    threshold: f64,
    m1: &NoiseMechanism,
    m2: &NoiseMechanism,
    rng: &mut RngStream,
    t_max: u64,
) -> AboveThreshOutcome
where
    I: IntoIterator<Item = f64>,
{
    let noisy_threshold = threshold + m1.noise(rng);
    let mut answers = Vec::new();
    for (i, q) in queries.into_iter().take(t_max as usize).enumerate() {
        if q + m2.noise(rng) > noisy_threshold {
            answers.push(Answer::Top);
            return AboveThreshOutcome {
                stop_index: Some(i as u64 + 1),
                answers,
            };
        }
        answers.push(Answer::Bottom);
    }
    AboveThreshOutcome {
        stop_index: None,
        answers,
    }
}

/// Private SPRT with Gaussian noise. `cfg.mode` must be `GaussianPrivSprt`.
pub fn run_privsprt(
    pair: &HypothesisPair,
    cfg: &PrivTestConfig,
    hypothesis: Hypothesis,
    streams: &mut TrialStreams,
) -> Result<TrialOutcome> {
    if cfg.mode != TestMode::GaussianPrivSprt {
        return Err(Error::param("mode", "run_privsprt needs gaussian_priv_sprt"));
    }
    run_trial(pair, cfg, hypothesis, streams, TrialOptions::default())
}

/// Two-sided above-threshold baseline with Laplace noise. `cfg.mode` must be
/// `LaplaceAboveThresh`.
pub fn run_laplace_abovethresh_test(
    pair: &HypothesisPair,
    cfg: &PrivTestConfig,
    hypothesis: Hypothesis,
    streams: &mut TrialStreams,
) -> Result<TrialOutcome> {
    if cfg.mode != TestMode::LaplaceAboveThresh {
        return Err(Error::param("mode", "run_laplace_abovethresh_test needs laplace_above_thresh"));
    }
    run_trial(pair, cfg, hypothesis, streams, TrialOptions::default())
}

/// Run one trial of whichever test `cfg.mode` selects.
pub fn run_trial(
    pair: &HypothesisPair,
    cfg: &PrivTestConfig,
    hypothesis: Hypothesis,
    streams: &mut TrialStreams,
    options: TrialOptions,
) -> Result<TrialOutcome> {
    cfg.validate()?;
    run_trial_prepared(&pair.prepare()?, cfg, hypothesis, streams, options)
}

pub(crate) fn run_trial_prepared(
    pair: &PreparedPair,
    cfg: &PrivTestConfig,
    hypothesis: Hypothesis,
    streams: &mut TrialStreams,
    options: TrialOptions,
) -> Result<TrialOutcome> {
    match cfg.mode {
        TestMode::NonPrivate => {
            sprt::run_sprt_prepared(pair, cfg.thresholds, hypothesis, &mut streams.data, cfg.t_max, options)
        }
        TestMode::GaussianPrivSprt | TestMode::LaplaceAboveThresh => {
            run_noisy_two_sided(pair, cfg, hypothesis, streams, options)
        }
    }
}

fn run_noisy_two_sided(
    pair: &PreparedPair,
    cfg: &PrivTestConfig,
    hypothesis: Hypothesis,
    streams: &mut TrialStreams,
    options: TrialOptions,
) -> Result<TrialOutcome> {
    let (m1, m2) = cfg.mechanisms();
    let trunc = cfg.trunc;
    // -a_hat is drawn before b_hat, each once per run.
    let neg_a_hat = -cfg.thresholds.a + m1.noise(&mut streams.threshold_noise);
    let b_hat = cfg.thresholds.b + m1.noise(&mut streams.threshold_noise);

    let mut trajectory = options.record_trajectory.then(Vec::new);
    let (mut stat, mut raw) = (0.0, 0.0);
    let mut decision = Decision::Censored;
    let mut t = 0;
    while t < cfg.t_max {
        t += 1;
        let x = pair.sample(hypothesis, &mut streams.data)?;
        let l = pair.llr(x)?;
        raw += l;
        stat += trunc.clip(l);
        if let Some(tr) = trajectory.as_mut() {
            tr.push((t, stat));
        }
        // Both branches get fresh noise every step; reject takes precedence.
        let query_a = stat + m2.noise(&mut streams.query_noise);
        let query_b = stat + m2.noise(&mut streams.query_noise);
        if query_b > b_hat {
            decision = Decision::RejectH0;
            break;
        }
        if query_a < neg_a_hat {
            decision = Decision::AcceptH0;
            break;
        }
    }
    Ok(TrialOutcome {
        decision,
        stopping_time: t,
        raw_llr: raw,
        log_weight: if options.reweight {
            log_weight_for(hypothesis, raw)
        } else {
            0.0
        },
        trajectory,
    })
}
