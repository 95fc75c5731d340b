//! Deterministic, trial-parallel Monte Carlo experiments.
//!
//! Trial `i` always draws from `TrialStreams::new(seed, i)`, whatever the
//! thresholds, noise scales or hypothesis. Trials are grouped into fixed
//! chunks of [`CHUNK_TRIALS`]; chunks run in parallel on the current rayon
//! pool and their partial sums are combined in chunk order, so results are
//! bit-identical for any number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{laplace_baseline_scales, privsprt_sigmas};
use crate::models::{Hypothesis, HypothesisPair, PreparedPair, TruncationSpec};
use crate::report::{Estimator, Metric, ResultRow};
use crate::rng::TrialStreams;
use crate::sequential_private::{run_trial_prepared, PrivTestConfig, TestMode};
use crate::sprt::{default_t_max, Decision, SprtThresholds, TrialOptions, TrialOutcome};

pub const CHUNK_TRIALS: u64 = 1024;
/// Default trials per calibration probe and per final estimate.
pub const DEFAULT_PROBE_TRIALS: u64 = 10_000;
pub const DEFAULT_FINAL_TRIALS: u64 = 100_000;
/// Probe budget of [`calibrate_thresholds`].
pub const MAX_CALIBRATION_PROBES: u32 = 60;

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_trials: u64,
    pub estimator: Estimator,
    /// Trials that hit the time cap without a decision.
    pub censored: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sum_sq: f64, n: u64, estimator: Estimator, censored: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let std_error = if n > 1 {
            let var = ((sum_sq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            n_trials: n,
            estimator,
            censored,
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.censored > 0
    }
}

/// Where the noise scales of an experiment come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mechanism", rename_all = "snake_case")]
pub enum NoiseSource {
    /// Gaussian noise calibrated to `(epsilon_prime, delta)`.
    Gaussian { epsilon_prime: f64, delta: f64 },
    /// Gaussian noise with explicit scales.
    Explicit { sigma1: f64, sigma2: f64 },
    /// Laplace above-threshold baseline at total budget `epsilon`.
    Laplace { epsilon: f64 },
    /// Wald's SPRT without noise or truncation.
    None,
}

impl NoiseSource {
    /// Resolve into a test configuration.
    pub fn test_config(
        &self,
        thresholds: SprtThresholds,
        trunc: TruncationSpec,
        t_max: u64,
    ) -> Result<PrivTestConfig> {
        match *self {
            NoiseSource::Gaussian { epsilon_prime, delta } => {
                let (s1, s2) = privsprt_sigmas(epsilon_prime, delta, trunc.value())?;
                PrivTestConfig::gaussian(thresholds, trunc, s1, s2, t_max)
            }
            NoiseSource::Explicit { sigma1, sigma2 } => PrivTestConfig::gaussian(thresholds, trunc, sigma1, sigma2, t_max),
            NoiseSource::Laplace { epsilon } => PrivTestConfig::laplace(thresholds, trunc, epsilon, t_max),
            NoiseSource::None => PrivTestConfig::non_private(thresholds, trunc, t_max),
        }
    }

    fn labels(&self) -> (Option<f64>, Option<f64>) {
        match *self {
            NoiseSource::Gaussian { epsilon_prime, delta } => (Some(epsilon_prime), Some(delta)),
            NoiseSource::Laplace { epsilon } => (Some(epsilon), None),
            NoiseSource::Explicit { .. } | NoiseSource::None => (None, None),
        }
    }

    /// Noise scales of this source at truncation `trunc`.
    pub fn scales(&self, trunc: TruncationSpec) -> Result<(f64, f64)> {
        match *self {
            NoiseSource::Gaussian { epsilon_prime, delta } => privsprt_sigmas(epsilon_prime, delta, trunc.value()),
            NoiseSource::Explicit { sigma1, sigma2 } => Ok((sigma1, sigma2)),
            NoiseSource::Laplace { epsilon } => laplace_baseline_scales(epsilon, trunc.value()),
            NoiseSource::None => Ok((0.0, 0.0)),
        }
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub pair: HypothesisPair,
    pub test: PrivTestConfig,
    pub noise: NoiseSource,
    pub n_trials: u64,
    pub master_seed: u64,
    pub record_trajectories: bool,
}

impl ExperimentConfig {
    /// Build from parts; `t_max = None` picks the default cap of 50 times
    /// the larger non-private Wald expected sample size (at least 1000).
    pub fn new(
        pair: HypothesisPair,
        thresholds: SprtThresholds,
        trunc: TruncationSpec,
        noise: NoiseSource,
        t_max: Option<u64>,
        n_trials: u64,
        master_seed: u64,
    ) -> Result<Self> {
        pair.validate()?;
        if n_trials == 0 {
            return Err(Error::param("n_trials", "must be at least 1"));
        }
        let t_max = t_max.unwrap_or_else(|| default_t_max(thresholds, &pair));
        let test = noise.test_config(thresholds, trunc, t_max)?;
        Ok(Self {
            pair,
            test,
            noise,
            n_trials,
            master_seed,
            record_trajectories: false,
        })
    }

    pub fn with_thresholds(&self, thresholds: SprtThresholds) -> Self {
        Self {
            test: self.test.with_thresholds(thresholds),
            ..self.clone()
        }
    }

    fn row(&self, hypothesis: Hypothesis, metric: Metric, est: &McEstimate) -> ResultRow {
        let (eps_prime, delta) = self.noise.labels();
        ResultRow {
            pair: self.pair.label(),
            mode: self.test.mode,
            a_trunc: self.test.trunc.value(),
            eps_prime,
            delta,
            sigma1: self.test.sigma1,
            sigma2: self.test.sigma2,
            a: self.test.thresholds.a,
            b: self.test.thresholds.b,
            hypothesis,
            metric,
            estimator: est.estimator,
            mean: est.mean,
            stderr: est.std_error,
            n: est.n_trials,
            censored: est.censored,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Partial {
    n: u64,
    censored: u64,
    accepts: u64,
    rejects: u64,
    sum_t: f64,
    sum_t2: f64,
    is_sum: f64,
    is_sum2: f64,
}

impl Partial {
    fn add(&mut self, o: &Partial) {
        self.n += o.n;
        self.censored += o.censored;
        self.accepts += o.accepts;
        self.rejects += o.rejects;
        self.sum_t += o.sum_t;
        self.sum_t2 += o.sum_t2;
        self.is_sum += o.is_sum;
        self.is_sum2 += o.is_sum2;
    }
}

fn chunk_ranges(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(CHUNK_TRIALS))
        .map(|c| (c * CHUNK_TRIALS, ((c + 1) * CHUNK_TRIALS).min(n)))
        .collect()
}

fn run_batch(
    pair: &PreparedPair,
    test: &PrivTestConfig,
    hypothesis: Hypothesis,
    n: u64,
    seed: u64,
) -> Result<Partial> {
    let opts = TrialOptions {
        record_trajectory: false,
        reweight: true,
    };
    let parts: Vec<Result<Partial>> = chunk_ranges(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut p = Partial::default();
            for i in lo..hi {
                let mut streams = TrialStreams::new(seed, i);
                let out = run_trial_prepared(pair, test, hypothesis, &mut streams, opts)?;
                let t = out.stopping_time as f64;
                p.n += 1;
                p.sum_t += t;
                p.sum_t2 += t * t;
                // The importance indicator is the error of the other hypothesis.
                let hit = match (out.decision, hypothesis) {
                    (Decision::Censored, _) => {
                        p.censored += 1;
                        false
                    }
                    (Decision::AcceptH0, h) => {
                        p.accepts += 1;
                        h == Hypothesis::H0
                    }
                    (Decision::RejectH0, h) => {
                        p.rejects += 1;
                        h == Hypothesis::H1
                    }
                };
                if hit {
                    // The log weight must be finite; its exponential may
                    // underflow to 0 below the f64 range.
                    if !out.log_weight.is_finite() {
                        return Err(Error::Numerical(format!("log importance weight {} at trial {i}", out.log_weight)));
                    }
                    let w = out.importance_weight();
                    if !w.is_finite() {
                        return Err(Error::Numerical(format!("importance weight {w} at trial {i}")));
                    }
                    p.is_sum += w;
                    p.is_sum2 += w * w;
                }
            }
            Ok(p)
        })
        .collect();
    let mut total = Partial::default();
    for p in parts {
        total.add(&p?);
    }
    Ok(total)
}

/// Everything one batch of trials under a single hypothesis estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HypothesisSummary {
    pub hypothesis: Hypothesis,
    pub expected_t: McEstimate,
    /// Type I error under H0, Type II error under H1.
    pub naive_error: McEstimate,
    /// Importance-sampled error of the other hypothesis: Type II from an H0
    /// batch, Type I from an H1 batch.
    pub importance_error: McEstimate,
}

impl HypothesisSummary {
    fn from_partial(hypothesis: Hypothesis, p: &Partial) -> Self {
        let errors = match hypothesis {
            Hypothesis::H0 => p.rejects,
            Hypothesis::H1 => p.accepts,
        } as f64;
        Self {
            hypothesis,
            expected_t: McEstimate::from_sums(p.sum_t, p.sum_t2, p.n, Estimator::Naive, p.censored),
            naive_error: McEstimate::from_sums(errors, errors, p.n, Estimator::Naive, p.censored),
            importance_error: McEstimate::from_sums(p.is_sum, p.is_sum2, p.n, Estimator::Importance, p.censored),
        }
    }

    pub fn naive_metric(&self) -> Metric {
        match self.hypothesis {
            Hypothesis::H0 => Metric::Type1Error,
            Hypothesis::H1 => Metric::Type2Error,
        }
    }

    pub fn importance_metric(&self) -> Metric {
        match self.hypothesis {
            Hypothesis::H0 => Metric::Type2Error,
            Hypothesis::H1 => Metric::Type1Error,
        }
    }
}

/// Run `cfg.n_trials` trials under `hypothesis`.
pub fn summarize_hypothesis(cfg: &ExperimentConfig, hypothesis: Hypothesis) -> Result<HypothesisSummary> {
    cfg.test.validate()?;
    let pair = cfg.pair.prepare()?;
    let p = run_batch(&pair, &cfg.test, hypothesis, cfg.n_trials, cfg.master_seed)?;
    Ok(HypothesisSummary::from_partial(hypothesis, &p))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorType {
    Type1,
    Type2,
}

/// Type I or Type II error. Importance sampling draws from the other
/// hypothesis and reweights by the likelihood ratio.
pub fn estimate_error(cfg: &ExperimentConfig, which: ErrorType, estimator: Estimator) -> Result<McEstimate> {
    let h = match (which, estimator) {
        (ErrorType::Type1, Estimator::Naive) | (ErrorType::Type2, Estimator::Importance) => Hypothesis::H0,
        (ErrorType::Type2, Estimator::Naive) | (ErrorType::Type1, Estimator::Importance) => Hypothesis::H1,
    };
    let s = summarize_hypothesis(cfg, h)?;
    Ok(match estimator {
        Estimator::Naive => s.naive_error,
        Estimator::Importance => s.importance_error,
    })
}

/// Mean stopping time; censored trials count at the cap.
pub fn estimate_expected_t(cfg: &ExperimentConfig, hypothesis: Hypothesis) -> Result<McEstimate> {
    Ok(summarize_hypothesis(cfg, hypothesis)?.expected_t)
}

/// Individual trial outcomes in trial order, with trajectories if requested.
pub fn run_trials(cfg: &ExperimentConfig, hypothesis: Hypothesis) -> Result<Vec<TrialOutcome>> {
    let pair = cfg.pair.prepare()?;
    let opts = TrialOptions {
        record_trajectory: cfg.record_trajectories,
        reweight: true,
    };
    let chunks: Vec<Result<Vec<TrialOutcome>>> = chunk_ranges(cfg.n_trials)
        .into_par_iter()
        .map(|(lo, hi)| {
            (lo..hi)
                .map(|i| run_trial_prepared(&pair, &cfg.test, hypothesis, &mut TrialStreams::new(cfg.master_seed, i), opts))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(cfg.n_trials as usize);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Both hypotheses of one configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub h0: HypothesisSummary,
    pub h1: HypothesisSummary,
}

impl ExperimentResult {
    pub fn type1_importance(&self) -> McEstimate {
        self.h1.importance_error
    }

    pub fn type2_importance(&self) -> McEstimate {
        self.h0.importance_error
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    Ok(ExperimentResult {
        h0: summarize_hypothesis(cfg, Hypothesis::H0)?,
        h1: summarize_hypothesis(cfg, Hypothesis::H1)?,
    })
}

/// Rows of one hypothesis summary: expected T, naive and importance errors.
pub fn summary_rows(cfg: &ExperimentConfig, s: &HypothesisSummary) -> Vec<ResultRow> {
    vec![
        cfg.row(s.hypothesis, Metric::ExpectedT, &s.expected_t),
        cfg.row(s.hypothesis, s.naive_metric(), &s.naive_error),
        cfg.row(s.hypothesis, s.importance_metric(), &s.importance_error),
    ]
}

pub fn experiment_rows(cfg: &ExperimentConfig, r: &ExperimentResult) -> Vec<ResultRow> {
    let mut rows = summary_rows(cfg, &r.h0);
    rows.extend(summary_rows(cfg, &r.h1));
    rows
}

/// Thresholds and error estimates of a calibration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationState {
    pub a: f64,
    pub b: f64,
    pub type1: f64,
    pub type2: f64,
    pub probes: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub thresholds: SprtThresholds,
    pub type1: McEstimate,
    pub type2: McEstimate,
    pub probes: u32,
}

/// Geometric bisection state for one threshold whose error falls as it grows.
#[derive(Clone, Copy, Debug)]
struct Bracket {
    x: f64,
    too_small: Option<f64>,
    too_large: Option<f64>,
}

impl Bracket {
    fn update(&mut self, score: f64) {
        if score > 1.0 {
            self.too_small = Some(self.too_small.map_or(self.x, |v: f64| v.max(self.x)));
        } else {
            self.too_large = Some(self.too_large.map_or(self.x, |v: f64| v.min(self.x)));
        }
        self.x = match (self.too_small, self.too_large) {
            (Some(lo), Some(hi)) => (lo * hi).sqrt(),
            (Some(lo), None) => lo * 2.0,
            (None, Some(hi)) => hi / 2.0,
            (None, None) => unreachable!(),
        };
    }
}

fn in_window(score: f64) -> bool {
    (0.5..=2.0).contains(&score)
}

/// Scale-aware starting threshold for a target error.
fn initial_threshold(template: &PrivTestConfig, target: f64) -> f64 {
    let log_target = (1.0 / target).ln();
    match template.mode {
        TestMode::NonPrivate => log_target,
        _ => {
            template.trunc.value() * log_target
                + 4.0 * (template.sigma1 * template.sigma1 + template.sigma2 * template.sigma2).sqrt()
        }
    }
}

/// Choose `(a, b)` so the importance-sampled errors land within a factor 2
/// of their targets.
///
/// Each probe runs `n_per_probe` trials under both hypotheses with the same
/// seed, so the errors are monotone in the thresholds across probes. With
/// `symmetric`, `a = b` and the larger of the two normalized errors is driven
/// into `[1/2, 2]`; otherwise `b` tracks the Type I target and `a` the Type II
/// target. Fails with [`Error::Calibration`] after
/// [`MAX_CALIBRATION_PROBES`] probes.
pub fn calibrate_thresholds(
    pair: &HypothesisPair,
    template: &PrivTestConfig,
    target_type1: f64,
    target_type2: f64,
    n_per_probe: u64,
    symmetric: bool,
    master_seed: u64,
) -> Result<CalibrationResult> {
    for (name, t) in [("target_type1", target_type1), ("target_type2", target_type2)] {
        if !(t > 0.0 && t < 0.5) {
            return Err(Error::param(name, format!("must lie in (0, 0.5), got {t}")));
        }
    }
    if n_per_probe == 0 {
        return Err(Error::param("n_per_probe", "must be at least 1"));
    }
    template.validate()?;
    let prepared = pair.prepare()?;

    let start_b = initial_threshold(template, target_type1);
    let start_a = if symmetric {
        start_b.max(initial_threshold(template, target_type2))
    } else {
        initial_threshold(template, target_type2)
    };
    let mut a_br = Bracket {
        x: start_a,
        too_small: None,
        too_large: None,
    };
    let mut b_br = Bracket {
        x: if symmetric { start_a } else { start_b },
        too_small: None,
        too_large: None,
    };
    let mut best: Option<(f64, CalibrationState)> = None;

    for probe in 1..=MAX_CALIBRATION_PROBES {
        let thresholds = SprtThresholds::new(a_br.x, b_br.x)?;
        let test = template.with_thresholds(thresholds);
        let h1 = HypothesisSummary::from_partial(
            Hypothesis::H1,
            &run_batch(&prepared, &test, Hypothesis::H1, n_per_probe, master_seed)?,
        );
        let h0 = HypothesisSummary::from_partial(
            Hypothesis::H0,
            &run_batch(&prepared, &test, Hypothesis::H0, n_per_probe, master_seed)?,
        );
        let (t1, t2) = (h1.importance_error, h0.importance_error);
        let (s1, s2) = (t1.mean / target_type1, t2.mean / target_type2);
        let state = CalibrationState {
            a: thresholds.a,
            b: thresholds.b,
            type1: t1.mean,
            type2: t2.mean,
            probes: probe,
        };
        let distance = |s: f64| if s > 0.0 { s.ln().abs() } else { f64::INFINITY };
        let miss = distance(s1).max(distance(s2));
        if best.as_ref().is_none_or(|(m, _)| miss < *m) {
            best = Some((miss, state));
        }

        let done = if symmetric {
            in_window(s1.max(s2))
        } else {
            in_window(s1) && in_window(s2)
        };
        if done {
            return Ok(CalibrationResult {
                thresholds,
                type1: t1,
                type2: t2,
                probes: probe,
            });
        }
        if symmetric {
            a_br.update(s1.max(s2));
            b_br = a_br;
        } else {
            if !in_window(s1) {
                b_br.update(s1);
            }
            if !in_window(s2) {
                a_br.update(s2);
            }
        }
    }
    let (_, state) = best.expect("at least one probe ran");
    Err(Error::Calibration {
        reason: format!("no thresholds within a factor 2 of the targets after {MAX_CALIBRATION_PROBES} probes"),
        best: Box::new(state),
    })
}

/// One grid point of an operating-characteristic / ASN sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub thresholds: SprtThresholds,
    pub h0: Option<HypothesisSummary>,
    pub h1: Option<HypothesisSummary>,
}

impl SweepPoint {
    /// `(error, E[T])`, both averaged over the two hypotheses, using the
    /// importance-sampled errors. Needs both hypotheses and a positive error.
    pub fn curve_point(&self) -> Option<(f64, f64)> {
        let (h0, h1) = (self.h0?, self.h1?);
        let err = 0.5 * (h1.importance_error.mean + h0.importance_error.mean);
        let et = 0.5 * (h0.expected_t.mean + h1.expected_t.mean);
        (err > 0.0).then_some((err, et))
    }
}

/// Sweep a threshold grid with common random numbers across grid points.
pub fn oc_asn_sweep(
    pair: &HypothesisPair,
    template: &PrivTestConfig,
    grid: &[SprtThresholds],
    hypotheses: &[Hypothesis],
    n_trials: u64,
    master_seed: u64,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::param("grid", "needs at least one threshold pair"));
    }
    if n_trials == 0 {
        return Err(Error::param("n_trials", "must be at least 1"));
    }
    template.validate()?;
    let prepared = pair.prepare()?;
    grid.iter()
        .map(|&thresholds| {
            let test = template.with_thresholds(thresholds);
            let mut point = SweepPoint {
                thresholds,
                h0: None,
                h1: None,
            };
            for &h in hypotheses {
                let s = HypothesisSummary::from_partial(h, &run_batch(&prepared, &test, h, n_trials, master_seed)?);
                match h {
                    Hypothesis::H0 => point.h0 = Some(s),
                    Hypothesis::H1 => point.h1 = Some(s),
                }
            }
            Ok(point)
        })
        .collect()
}

/// Rows of a sweep, labelled with `cfg`'s pair and noise.
pub fn sweep_rows(cfg: &ExperimentConfig, points: &[SweepPoint]) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for p in points {
        let c = cfg.with_thresholds(p.thresholds);
        for s in [p.h0, p.h1].into_iter().flatten() {
            rows.extend(summary_rows(&c, &s));
        }
    }
    rows
}

/// `E[T]` of a curve at error level `error`, linear in `ln(1/error)`.
/// `None` outside the curve's error range.
pub fn interpolate_expected_t(curve: &[(f64, f64)], error: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(e, _)| *e > 0.0)
        .map(|&(e, t)| ((1.0 / e).ln(), t))
        .collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let x = (1.0 / error).ln();
    pts.windows(2).find(|w| w[0].0 <= x && x <= w[1].0).map(|w| {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x1 == x0 {
            0.5 * (y0 + y1)
        } else {
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    })
}

/// Matched-error ordering of several curves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingCheck {
    /// Error levels compared, spread evenly in `ln(1/error)` over the overlap.
    pub levels: Vec<f64>,
    /// `E[T]` of every curve at every level.
    pub expected_t: Vec<Vec<f64>>,
    /// Share of levels where `E[T]` strictly decreases along the curve order.
    pub fraction_ordered: f64,
}

/// Compare curves at `n_levels` shared error levels. Curves must be listed in
/// the order of decreasing expected `E[T]`.
pub fn matched_error_ordering(curves: &[Vec<(f64, f64)>], n_levels: usize) -> Option<OrderingCheck> {
    if curves.len() < 2 || n_levels == 0 {
        return None;
    }
    let range = |c: &Vec<(f64, f64)>| {
        let xs: Vec<f64> = c.iter().filter(|p| p.0 > 0.0).map(|p| (1.0 / p.0).ln()).collect();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for c in curves {
        let (l, h) = range(c);
        lo = lo.max(l);
        hi = hi.min(h);
    }
    if !(lo < hi) {
        return None;
    }
    let levels: Vec<f64> = (0..n_levels)
        .map(|i| {
            let x = if n_levels == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n_levels - 1) as f64
            };
            (-x).exp()
        })
        .collect();
    let expected_t: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| levels.iter().map(|&e| interpolate_expected_t(c, e)).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()?;
    let ordered = (0..levels.len())
        .filter(|&j| expected_t.windows(2).all(|w| w[0][j] > w[1][j]))
        .count();
    Some(OrderingCheck {
        fraction_ordered: ordered as f64 / levels.len() as f64,
        levels,
        expected_t,
    })
}

/// Run `f` on a dedicated rayon pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
