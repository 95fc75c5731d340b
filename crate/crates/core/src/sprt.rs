//! Wald's sequential probability ratio test and its classical approximations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{kl_divergence, Hypothesis, HypothesisPair, KlDirection, PreparedPair};
use crate::rng::RngStream;

/// Stop below `-a` (accept H0) or at or above `b` (reject H0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprtThresholds {
    pub a: f64,
    pub b: f64,
}

impl SprtThresholds {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let t = Self { a, b };
        t.validate()?;
        Ok(t)
    }

    pub fn symmetric(a: f64) -> Result<Self> {
        Self::new(a, a)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    AcceptH0,
    RejectH0,
    /// The time cap was reached without a decision.
    Censored,
}

/// Result of one simulated test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub decision: Decision,
    pub stopping_time: u64,
    /// Raw (unclipped) `sum log f1(x_i)/f0(x_i)` over the observed samples.
    pub raw_llr: f64,
    /// Log of the likelihood ratio from the sampling hypothesis to the other
    /// one; zero unless reweighting was requested.
    pub log_weight: f64,
    /// `(t, statistic)` after every step, when requested.
    pub trajectory: Option<Vec<(u64, f64)>>,
}

impl TrialOutcome {
    /// `prod f_other(x_i) / f_sampled(x_i)`, or 1 when reweighting is off.
    pub fn importance_weight(&self) -> f64 {
        self.log_weight.exp()
    }
}

/// Per-trial bookkeeping switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOptions {
    pub record_trajectory: bool,
    /// Fill `log_weight` for estimating probabilities under the other hypothesis.
    pub reweight: bool,
}

/// Log importance weight for data drawn under `sampled` given its raw LLR sum.
#[inline]
pub(crate) fn log_weight_for(sampled: Hypothesis, raw_llr: f64) -> f64 {
    match sampled {
        Hypothesis::H1 => -raw_llr,
        Hypothesis::H0 => raw_llr,
    }
}

pub fn run_sprt(
    pair: &HypothesisPair,
    thresholds: SprtThresholds,
    hypothesis: Hypothesis,
    rng: &mut RngStream,
    t_max: u64,
) -> Result<TrialOutcome> {
    run_sprt_with(pair, thresholds, hypothesis, rng, t_max, TrialOptions::default())
}

pub fn run_sprt_with(
    pair: &HypothesisPair,
    thresholds: SprtThresholds,
    hypothesis: Hypothesis,
    rng: &mut RngStream,
    t_max: u64,
    options: TrialOptions,
) -> Result<TrialOutcome> {
    thresholds.validate()?;
    if t_max == 0 {
        return Err(Error::param("t_max", "must be at least 1"));
    }
    run_sprt_prepared(&pair.prepare()?, thresholds, hypothesis, rng, t_max, options)
}

pub(crate) fn run_sprt_prepared(
    pair: &PreparedPair,
    thresholds: SprtThresholds,
    hypothesis: Hypothesis,
    rng: &mut RngStream,
    t_max: u64,
    options: TrialOptions,
) -> Result<TrialOutcome> {
    let mut trajectory = options.record_trajectory.then(Vec::new);
    let mut stat = 0.0;
    let mut decision = Decision::Censored;
    let mut t = 0;
    while t < t_max {
        t += 1;
        let x = pair.sample(hypothesis, rng)?;
        stat += pair.llr(x)?;
        if let Some(tr) = trajectory.as_mut() {
            tr.push((t, stat));
        }
        if stat >= thresholds.b {
            decision = Decision::RejectH0;
            break;
        }
        if stat <= -thresholds.a {
            decision = Decision::AcceptH0;
            break;
        }
    }
    Ok(TrialOutcome {
        decision,
        stopping_time: t,
        raw_llr: stat,
        log_weight: if options.reweight {
            log_weight_for(hypothesis, stat)
        } else {
            0.0
        },
        trajectory,
    })
}

/// Wald's approximations `(type1, type2)` ignoring overshoot.
pub fn wald_error_approx(thresholds: SprtThresholds) -> Result<(f64, f64)> {
    thresholds.validate()?;
    let (a, b) = (thresholds.a, thresholds.b);
    // Scaled by e^-b so large thresholds do not overflow.
    let denom = -(-a - b).exp_m1();
    let type1 = -(-a).exp_m1() * (-b).exp() / denom;
    let type2 = (-a).exp() * -(-b).exp_m1() / denom;
    Ok((type1, type2))
}

/// Wald's approximations `(E0[T], E1[T])` of the expected sample sizes.
pub fn wald_expected_t(thresholds: SprtThresholds, pair: &HypothesisPair) -> Result<(f64, f64)> {
    thresholds.validate()?;
    let d10 = kl_divergence(pair, KlDirection::Forward)?.value;
    let d01 = kl_divergence(pair, KlDirection::Reverse)?.value;
    if !(d10 > 0.0 && d01 > 0.0) {
        return Err(Error::Domain("hypothesis pair has zero KL divergence".into()));
    }
    let (a, b) = (thresholds.a, thresholds.b);
    let (ea, eb) = ((-a).exp(), (-b).exp());
    let denom = -(-a - b).exp_m1();
    let e1 = (-a * ea * (1.0 - eb) + b * (1.0 - ea)) / (d10 * denom);
    let e0 = (a * (1.0 - eb) - b * eb * (1.0 - ea)) / (d01 * denom);
    Ok((e0, e1))
}

/// Non-private time cap: `max(ceil(50 * max Wald E[T]), 1000)`, or
/// [`DEFAULT_T_MAX`] when Wald's values are unavailable.
pub fn default_t_max(thresholds: SprtThresholds, pair: &HypothesisPair) -> u64 {
    match pair {
        HypothesisPair::Custom(_) => DEFAULT_T_MAX,
        _ => match wald_expected_t(thresholds, pair) {
            Ok((e0, e1)) => ((50.0 * e0.max(e1)).ceil() as u64).max(1000),
            Err(_) => DEFAULT_T_MAX,
        },
    }
}

pub const DEFAULT_T_MAX: u64 = 1_000_000;
