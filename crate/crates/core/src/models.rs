//! Simple-vs-simple hypothesis pairs and their log-likelihood ratios.
//!
//! Besides the raw per-observation LLR this module provides the clipped LLR
//! used by the private test, the drift constants of the clipped LLR under each
//! hypothesis, KL divergences and the sensitivity of the clipped statistic.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Which hypothesis generates the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn other(self) -> Self {
        match self {
            Hypothesis::H0 => Hypothesis::H1,
            Hypothesis::H1 => Hypothesis::H0,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::H0 => f.write_str("h0"),
            Hypothesis::H1 => f.write_str("h1"),
        }
    }
}

pub type LogDensity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Sampler = Arc<dyn Fn(&mut RngStream) -> f64 + Send + Sync>;

/// A user-supplied pair of log densities with optional samplers.
#[derive(Clone)]
pub struct CustomPair {
    pub name: String,
    pub log_f0: LogDensity,
    pub log_f1: LogDensity,
    pub sampler0: Option<Sampler>,
    pub sampler1: Option<Sampler>,
}

impl fmt::Debug for CustomPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPair")
            .field("name", &self.name)
            .field("sampler0", &self.sampler0.is_some())
            .field("sampler1", &self.sampler1.is_some())
            .finish()
    }
}

/// Null and alternative observation distributions.
///
/// Serialized form: `{"kind":"bernoulli","theta0":0.7,"theta1":0.2}` or
/// `{"kind":"gaussian_mean","mu0":0.0,"mu1":1.0}`. Custom pairs are in-process
/// only.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisPair {
    Bernoulli { theta0: f64, theta1: f64 },
    /// Unit-variance normal means.
    GaussianMean { mu0: f64, mu1: f64 },
    #[serde(skip)]
    Custom(CustomPair),
}

impl HypothesisPair {
    pub fn bernoulli(theta0: f64, theta1: f64) -> Result<Self> {
        let pair = HypothesisPair::Bernoulli { theta0, theta1 };
        pair.validate()?;
        Ok(pair)
    }

    pub fn gaussian_mean(mu0: f64, mu1: f64) -> Result<Self> {
        let pair = HypothesisPair::GaussianMean { mu0, mu1 };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            HypothesisPair::Bernoulli { theta0, theta1 } => {
                for (name, t) in [("theta0", theta0), ("theta1", theta1)] {
                    if !(t > 0.0 && t < 1.0) {
                        return Err(Error::param(name, format!("must lie in (0, 1), got {t}")));
                    }
                }
                if theta0 == theta1 {
                    return Err(Error::param("theta1", "must differ from theta0"));
                }
            }
            HypothesisPair::GaussianMean { mu0, mu1 } => {
                if !mu0.is_finite() || !mu1.is_finite() {
                    return Err(Error::param("mu0", "means must be finite"));
                }
                if mu0 == mu1 {
                    return Err(Error::param("mu1", "must differ from mu0"));
                }
            }
            HypothesisPair::Custom(_) => {}
        }
        Ok(())
    }

    /// Short label used in reports, e.g. `bernoulli(0.7,0.2)`.
    pub fn label(&self) -> String {
        match self {
            HypothesisPair::Bernoulli { theta0, theta1 } => format!("bernoulli({theta0},{theta1})"),
            HypothesisPair::GaussianMean { mu0, mu1 } => format!("gaussian_mean({mu0},{mu1})"),
            HypothesisPair::Custom(c) => format!("custom({})", c.name),
        }
    }

    /// Log-density of `x` under the given hypothesis.
    pub fn log_density(&self, hypothesis: Hypothesis, x: f64) -> Result<f64> {
        let v = match self {
            HypothesisPair::Bernoulli { theta0, theta1 } => {
                let theta = match hypothesis {
                    Hypothesis::H0 => *theta0,
                    Hypothesis::H1 => *theta1,
                };
                if x == 1.0 {
                    theta.ln()
                } else if x == 0.0 {
                    (1.0 - theta).ln()
                } else {
                    return Err(Error::Domain(format!("bernoulli observation must be 0 or 1, got {x}")));
                }
            }
            HypothesisPair::GaussianMean { mu0, mu1 } => {
                let mu = match hypothesis {
                    Hypothesis::H0 => *mu0,
                    Hypothesis::H1 => *mu1,
                };
                -0.5 * (x - mu).powi(2) - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            HypothesisPair::Custom(c) => match hypothesis {
                Hypothesis::H0 => (c.log_f0)(x),
                Hypothesis::H1 => (c.log_f1)(x),
            },
        };
        Ok(v)
    }

    pub(crate) fn prepare(&self) -> Result<PreparedPair> {
        self.validate()?;
        Ok(match *self {
            HypothesisPair::Bernoulli { theta0, theta1 } => PreparedPair::Bernoulli {
                theta0,
                theta1,
                llr_one: (theta1 / theta0).ln(),
                llr_zero: ((1.0 - theta1) / (1.0 - theta0)).ln(),
            },
            HypothesisPair::GaussianMean { mu0, mu1 } => PreparedPair::Gaussian {
                mu0,
                mu1,
                slope: mu1 - mu0,
                offset: 0.5 * (mu1 * mu1 - mu0 * mu0),
            },
            HypothesisPair::Custom(ref c) => PreparedPair::Custom(c.clone()),
        })
    }
}

/// Hot-loop form of a pair with the LLR constants precomputed.
#[derive(Clone, Debug)]
pub(crate) enum PreparedPair {
    Bernoulli {
        theta0: f64,
        theta1: f64,
        llr_one: f64,
        llr_zero: f64,
    },
    Gaussian {
        mu0: f64,
        mu1: f64,
        slope: f64,
        offset: f64,
    },
    Custom(CustomPair),
}

impl PreparedPair {
    #[inline]
    pub(crate) fn llr(&self, x: f64) -> Result<f64> {
        let v = match self {
            PreparedPair::Bernoulli { llr_one, llr_zero, .. } => {
                if x == 1.0 {
                    *llr_one
                } else if x == 0.0 {
                    *llr_zero
                } else {
                    return Err(Error::Domain(format!("bernoulli observation must be 0 or 1, got {x}")));
                }
            }
            PreparedPair::Gaussian { slope, offset, .. } => slope * x - offset,
            PreparedPair::Custom(c) => (c.log_f1)(x) - (c.log_f0)(x),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("log-likelihood ratio is not finite at x = {x}")))
        }
    }

    #[inline]
    pub(crate) fn sample(&self, hypothesis: Hypothesis, rng: &mut RngStream) -> Result<f64> {
        match self {
            PreparedPair::Bernoulli { theta0, theta1, .. } => {
                let theta = match hypothesis {
                    Hypothesis::H0 => *theta0,
                    Hypothesis::H1 => *theta1,
                };
                Ok(if rng.uniform() < theta { 1.0 } else { 0.0 })
            }
            PreparedPair::Gaussian { mu0, mu1, .. } => {
                let mu = match hypothesis {
                    Hypothesis::H0 => *mu0,
                    Hypothesis::H1 => *mu1,
                };
                Ok(mu + rng.standard_normal())
            }
            PreparedPair::Custom(c) => {
                let sampler = match hypothesis {
                    Hypothesis::H0 => c.sampler0.as_ref(),
                    Hypothesis::H1 => c.sampler1.as_ref(),
                };
                sampler
                    .map(|s| s(rng))
                    .ok_or_else(|| Error::Unsupported(format!("custom pair `{}` has no {hypothesis} sampler", c.name)))
            }
        }
    }
}

/// The truncation level `A` of the clipped log-likelihood ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TruncationSpec(f64);

impl TruncationSpec {
    pub fn new(a_trunc: f64) -> Result<Self> {
        if a_trunc.is_finite() && a_trunc > 0.0 {
            Ok(Self(a_trunc))
        } else {
            Err(Error::param("truncation", format!("must be positive and finite, got {a_trunc}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Clip into `[-A, A]`; the endpoints pass through unchanged.
    #[inline]
    pub fn clip(self, x: f64) -> f64 {
        x.clamp(-self.0, self.0)
    }
}

impl TryFrom<f64> for TruncationSpec {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TruncationSpec> for f64 {
    fn from(t: TruncationSpec) -> f64 {
        t.0
    }
}

/// Expected clipped LLR magnitudes: `mu0 = -E0[clip(llr)]`, `mu1 = E1[clip(llr)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriftConstants {
    pub mu0: f64,
    pub mu1: f64,
    /// Monte Carlo standard errors of `(mu0, mu1)`; `None` for closed forms.
    pub std_error: Option<(f64, f64)>,
}

/// Direction of a KL divergence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlDirection {
    /// `D(f1 || f0)`, the drift of the LLR under H1.
    Forward,
    /// `D(f0 || f1)`, minus the drift of the LLR under H0.
    Reverse,
}

/// A value with its Monte Carlo standard error (zero when exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Samples used by the Monte Carlo fallbacks for custom pairs.
pub const CUSTOM_MC_SAMPLES: usize = 200_000;
const CUSTOM_MC_SEED: u64 = 0x5EED_C057;

pub fn llr(pair: &HypothesisPair, x: f64) -> Result<f64> {
    pair.prepare()?.llr(x)
}

pub fn truncated_llr(pair: &HypothesisPair, x: f64, trunc: TruncationSpec) -> Result<f64> {
    Ok(trunc.clip(llr(pair, x)?))
}

/// Running clipped statistic; zero for an empty sequence.
pub fn cumulative_truncated_llr(pair: &HypothesisPair, xs: &[f64], trunc: TruncationSpec) -> Result<f64> {
    let prepared = pair.prepare()?;
    xs.iter().try_fold(0.0, |acc, &x| Ok(acc + trunc.clip(prepared.llr(x)?)))
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E[clip(Y, -A, A)]` for `Y ~ N(mean, sd^2)`.
fn clipped_normal_mean(mean: f64, sd: f64, a: f64) -> f64 {
    let lo = (-a - mean) / sd;
    let hi = (a - mean) / sd;
    let (cdf_lo, cdf_hi) = (normal_cdf(lo), normal_cdf(hi));
    mean * (cdf_hi - cdf_lo) - sd * (normal_pdf(hi) - normal_pdf(lo)) + a * normal_cdf(-hi) - a * cdf_lo
}

fn mc_mean<F>(pair: &PreparedPair, hypothesis: Hypothesis, n: usize, seed_path: u64, f: F) -> Result<ScalarEstimate>
where
    F: Fn(f64) -> f64,
{
    let mut rng = RngStream::from_path(CUSTOM_MC_SEED, &[seed_path]);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let x = pair.sample(hypothesis, &mut rng)?;
        let v = f(pair.llr(x)?);
        sum += v;
        sum_sq += v * v;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    Ok(ScalarEstimate {
        value: mean,
        std_error: (var / nf).sqrt(),
    })
}

pub fn drift_constants(pair: &HypothesisPair, trunc: TruncationSpec) -> Result<DriftConstants> {
    let a = trunc.value();
    match pair.prepare()? {
        PreparedPair::Bernoulli {
            theta0,
            theta1,
            llr_one,
            llr_zero,
        } => {
            let (one, zero) = (trunc.clip(llr_one), trunc.clip(llr_zero));
            Ok(DriftConstants {
                mu0: -(theta0 * one + (1.0 - theta0) * zero),
                mu1: theta1 * one + (1.0 - theta1) * zero,
                std_error: None,
            })
        }
        PreparedPair::Gaussian { slope, .. } => {
            // Under H1 the LLR is N(d^2/2, d^2); under H0 it is N(-d^2/2, d^2).
            let sd = slope.abs();
            let half = 0.5 * slope * slope;
            Ok(DriftConstants {
                mu0: -clipped_normal_mean(-half, sd, a),
                mu1: clipped_normal_mean(half, sd, a),
                std_error: None,
            })
        }
        prepared @ PreparedPair::Custom(_) => {
            let e0 = mc_mean(&prepared, Hypothesis::H0, CUSTOM_MC_SAMPLES, 0, |v| trunc.clip(v))?;
            let e1 = mc_mean(&prepared, Hypothesis::H1, CUSTOM_MC_SAMPLES, 1, |v| trunc.clip(v))?;
            Ok(DriftConstants {
                mu0: -e0.value,
                mu1: e1.value,
                std_error: Some((e0.std_error, e1.std_error)),
            })
        }
    }
}

pub fn kl_divergence(pair: &HypothesisPair, direction: KlDirection) -> Result<ScalarEstimate> {
    let exact = |value: f64| ScalarEstimate { value, std_error: 0.0 };
    match (pair.prepare()?, direction) {
        (PreparedPair::Bernoulli { theta0, theta1, .. }, dir) => {
            let (p, q) = match dir {
                KlDirection::Forward => (theta1, theta0),
                KlDirection::Reverse => (theta0, theta1),
            };
            Ok(exact(p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()))
        }
        (PreparedPair::Gaussian { slope, .. }, _) => Ok(exact(0.5 * slope * slope)),
        (prepared @ PreparedPair::Custom(_), KlDirection::Forward) => {
            mc_mean(&prepared, Hypothesis::H1, CUSTOM_MC_SAMPLES, 2, |v| v)
        }
        (prepared @ PreparedPair::Custom(_), KlDirection::Reverse) => {
            let e = mc_mean(&prepared, Hypothesis::H0, CUSTOM_MC_SAMPLES, 3, |v| v)?;
            Ok(ScalarEstimate {
                value: -e.value,
                std_error: e.std_error,
            })
        }
    }
}

/// Sensitivity of one clipped LLR term: `min(raw LLR range, 2A)`.
///
/// Gaussian and custom pairs have an unbounded (or unknown) raw range, so
/// their sensitivity is exactly `2A`.
pub fn sensitivity(pair: &HypothesisPair, trunc: TruncationSpec) -> Result<f64> {
    let cap = 2.0 * trunc.value();
    Ok(match pair.prepare()? {
        PreparedPair::Bernoulli { llr_one, llr_zero, .. } => (llr_one - llr_zero).abs().min(cap),
        _ => cap,
    })
}

pub fn sample(pair: &HypothesisPair, hypothesis: Hypothesis, rng: &mut RngStream) -> Result<f64> {
    pair.prepare()?.sample(hypothesis, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn b72() -> HypothesisPair {
        HypothesisPair::bernoulli(0.7, 0.2).unwrap()
    }

    fn g01() -> HypothesisPair {
        HypothesisPair::gaussian_mean(0.0, 1.0).unwrap()
    }

    fn t(a: f64) -> TruncationSpec {
        TruncationSpec::new(a).unwrap()
    }

    #[test]
    fn llr_examples() {
        assert_abs_diff_eq!(llr(&g01(), 0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(llr(&b72(), 1.0).unwrap(), -1.252_762_968_495_367_8, epsilon = 1e-12);
        assert_abs_diff_eq!(llr(&b72(), 0.0).unwrap(), 0.980_829_253_011_726_3, epsilon = 1e-12);
    }

    #[test]
    fn llr_outside_support_is_domain_error() {
        assert!(matches!(llr(&b72(), 0.5), Err(Error::Domain(_))));
        let custom = HypothesisPair::Custom(CustomPair {
            name: "half-line".into(),
            log_f0: Arc::new(|x| if x >= 0.0 { -x } else { f64::NEG_INFINITY }),
            log_f1: Arc::new(|x| (0.5f64).ln() - 0.5 * x),
            sampler0: None,
            sampler1: None,
        });
        assert!(matches!(llr(&custom, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn truncated_examples() {
        assert_eq!(truncated_llr(&g01(), 0.5, t(0.1)).unwrap(), 0.0);
        assert_eq!(truncated_llr(&b72(), 1.0, t(0.5)).unwrap(), -0.5);
        assert_eq!(truncated_llr(&b72(), 0.0, t(0.5)).unwrap(), 0.5);
        // inclusive boundary
        assert_eq!(t(0.5).clip(0.5), 0.5);
        assert_eq!(t(0.5).clip(-0.5), -0.5);
    }

    #[test]
    fn cumulative_examples() {
        assert_eq!(cumulative_truncated_llr(&b72(), &[], t(0.5)).unwrap(), 0.0);
        assert_eq!(cumulative_truncated_llr(&b72(), &[1.0, 0.0], t(0.5)).unwrap(), 0.0);
        assert_eq!(cumulative_truncated_llr(&g01(), &[0.5, 0.5], t(10.0)).unwrap(), 0.0);
    }

    #[test]
    fn bernoulli_drift_examples() {
        let d = drift_constants(&b72(), t(0.5)).unwrap();
        assert_abs_diff_eq!(d.mu0, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mu1, 0.3, epsilon = 1e-15);
        let sym = drift_constants(&HypothesisPair::bernoulli(0.7, 0.3).unwrap(), t(0.05)).unwrap();
        assert_abs_diff_eq!(sym.mu0, 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(sym.mu1, 0.02, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_drift_matches_quadrature() {
        // Frozen from an independent adaptive quadrature of E[clip(x - 1/2)].
        let cases = [
            (0.5, 0.184_373_190_186_253_67),
            (1.0, 0.331_510_236_361_298_67),
            (2.0, 0.472_697_343_416_523_64),
            (5.0, 0.499_999_309_042_961_25),
        ];
        for (a, expected) in cases {
            let d = drift_constants(&g01(), t(a)).unwrap();
            assert_abs_diff_eq!(d.mu1, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(d.mu0, expected, epsilon = 1e-12);
        }
        let far = drift_constants(&HypothesisPair::gaussian_mean(0.0, 2.0).unwrap(), t(0.5)).unwrap();
        assert_abs_diff_eq!(far.mu1, 0.338_839_900_866_599_2, epsilon = 1e-12);
        let huge = drift_constants(&g01(), t(1e3)).unwrap();
        assert_abs_diff_eq!(huge.mu1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn heavy_clipping_can_flip_a_drift_sign() {
        // Both LLR values clip to +-A, so mu1 = A (1 - 2 theta1) < 0 here.
        let pair = HypothesisPair::bernoulli(0.01, 0.2).unwrap();
        let d = drift_constants(&pair, t(0.01)).unwrap();
        assert_abs_diff_eq!(d.mu1, 0.01 * (0.2 - 0.8), epsilon = 1e-15);
        assert!(d.mu0 > 0.0);
    }

    #[test]
    fn drift_converges_to_kl() {
        let pair = HypothesisPair::bernoulli(0.6, 0.3).unwrap();
        let d = drift_constants(&pair, t(50.0)).unwrap();
        let fwd = kl_divergence(&pair, KlDirection::Forward).unwrap().value;
        let rev = kl_divergence(&pair, KlDirection::Reverse).unwrap().value;
        assert_abs_diff_eq!(d.mu1, fwd, epsilon = 1e-14);
        assert_abs_diff_eq!(d.mu0, rev, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_drift_agrees_with_monte_carlo() {
        let pairs = [
            b72(),
            HypothesisPair::bernoulli(0.6, 0.4).unwrap(),
            g01(),
            HypothesisPair::gaussian_mean(0.0, 2.0).unwrap(),
        ];
        let n = 1_000_000;
        for pair in pairs {
            for a in [0.2, 0.5, 2.0] {
                let trunc = t(a);
                let exact = drift_constants(&pair, trunc).unwrap();
                let prepared = pair.prepare().unwrap();
                let e0 = mc_mean(&prepared, Hypothesis::H0, n, 10, |v| trunc.clip(v)).unwrap();
                let e1 = mc_mean(&prepared, Hypothesis::H1, n, 11, |v| trunc.clip(v)).unwrap();
                assert!((exact.mu0 + e0.value).abs() <= 4.0 * e0.std_error, "{pair:?} A={a}");
                assert!((exact.mu1 - e1.value).abs() <= 4.0 * e1.std_error, "{pair:?} A={a}");
            }
        }
    }

    fn laplace_shift_pair() -> HypothesisPair {
        // f0 = Laplace(0, 1), f1 = Laplace(1, 1); D(f1||f0) = e^-1.
        HypothesisPair::Custom(CustomPair {
            name: "laplace-shift".into(),
            log_f0: Arc::new(|x: f64| -x.abs() - 2f64.ln()),
            log_f1: Arc::new(|x: f64| -(x - 1.0).abs() - 2f64.ln()),
            sampler0: Some(Arc::new(|r: &mut RngStream| r.laplace(1.0))),
            sampler1: Some(Arc::new(|r: &mut RngStream| 1.0 + r.laplace(1.0))),
        })
    }

    #[test]
    fn custom_pair_uses_monte_carlo_with_error() {
        let pair = laplace_shift_pair();
        let kl = kl_divergence(&pair, KlDirection::Forward).unwrap();
        let expected = (-1.0f64).exp();
        assert!(kl.std_error > 0.0);
        assert!((kl.value - expected).abs() < 4.0 * kl.std_error);
        // LLR is bounded by 1 in magnitude, so A = 5 leaves it unclipped.
        let d = drift_constants(&pair, t(5.0)).unwrap();
        let (se0, se1) = d.std_error.unwrap();
        assert!((d.mu1 - expected).abs() < 4.0 * se1);
        assert!((d.mu0 - expected).abs() < 4.0 * se0);
        assert_eq!(sensitivity(&pair, t(0.5)).unwrap(), 1.0);
    }

    #[test]
    fn custom_pair_without_sampler_is_unsupported() {
        let pair = HypothesisPair::Custom(CustomPair {
            name: "no-sampler".into(),
            log_f0: Arc::new(|x: f64| -0.5 * x * x),
            log_f1: Arc::new(|x: f64| -0.5 * (x - 1.0) * (x - 1.0)),
            sampler0: None,
            sampler1: None,
        });
        assert!(matches!(drift_constants(&pair, t(1.0)), Err(Error::Unsupported(_))));
        assert!(matches!(kl_divergence(&pair, KlDirection::Reverse), Err(Error::Unsupported(_))));
        let mut rng = RngStream::new(0);
        assert!(matches!(sample(&pair, Hypothesis::H0, &mut rng), Err(Error::Unsupported(_))));
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&g01(), KlDirection::Forward).unwrap().value, 0.5);
        assert_eq!(kl_divergence(&g01(), KlDirection::Reverse).unwrap().value, 0.5);
        let sym = HypothesisPair::bernoulli(0.7, 0.3).unwrap();
        assert_abs_diff_eq!(
            kl_divergence(&sym, KlDirection::Forward).unwrap().value,
            kl_divergence(&sym, KlDirection::Reverse).unwrap().value,
            epsilon = 1e-15
        );
        let p64 = HypothesisPair::bernoulli(0.6, 0.4).unwrap();
        assert_abs_diff_eq!(
            kl_divergence(&p64, KlDirection::Forward).unwrap().value,
            0.081_093_021_621_632_82,
            epsilon = 1e-14
        );
    }

    #[test]
    fn sensitivity_examples() {
        assert_eq!(sensitivity(&g01(), t(0.5)).unwrap(), 1.0);
        assert_eq!(sensitivity(&b72(), t(0.5)).unwrap(), 1.0);
        assert_abs_diff_eq!(sensitivity(&b72(), t(2.0)).unwrap(), 2.233_592_221_507_094, epsilon = 1e-12);
    }

    #[test]
    fn sampling_means_and_determinism() {
        let n = 200_000;
        let mut rng = RngStream::new(3);
        let mean_b: f64 = (0..n).map(|_| sample(&b72(), Hypothesis::H0, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean_b - 0.7).abs() < 4.0 * (0.21f64 / n as f64).sqrt());
        let mean_g: f64 = (0..n).map(|_| sample(&g01(), Hypothesis::H1, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean_g - 1.0).abs() < 4.0 / (n as f64).sqrt());

        let mut a = RngStream::from_path(5, &[1]);
        let mut b = RngStream::from_path(5, &[1]);
        assert_eq!(
            sample(&g01(), Hypothesis::H0, &mut a).unwrap(),
            sample(&g01(), Hypothesis::H0, &mut b).unwrap()
        );
    }

    #[test]
    fn invalid_pairs_rejected() {
        assert!(HypothesisPair::bernoulli(0.0, 0.2).is_err());
        assert!(HypothesisPair::bernoulli(0.4, 0.4).is_err());
        assert!(HypothesisPair::gaussian_mean(1.0, 1.0).is_err());
        assert!(TruncationSpec::new(0.0).is_err());
        assert!(TruncationSpec::new(f64::INFINITY).is_err());
    }

    #[test]
    fn pair_json_round_trip() {
        let json = r#"{"kind":"bernoulli","theta0":0.7,"theta1":0.2}"#;
        let pair: HypothesisPair = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&pair).unwrap(), json);
        let g: HypothesisPair = serde_json::from_str(r#"{"kind":"gaussian_mean","mu0":0.0,"mu1":1.0}"#).unwrap();
        assert!(matches!(g, HypothesisPair::GaussianMean { mu0, mu1 } if mu0 == 0.0 && mu1 == 1.0));
    }

    proptest! {
        #[test]
        fn clipped_llr_is_bounded_and_idempotent(
            theta0 in 0.01f64..0.99, theta1 in 0.01f64..0.99,
            mu in -3.0f64..3.0, x in -10.0f64..10.0, a in 0.01f64..5.0, bit in any::<bool>()
        ) {
            prop_assume!((theta0 - theta1).abs() > 1e-3 && mu.abs() > 1e-3);
            let trunc = t(a);
            let bern = HypothesisPair::bernoulli(theta0, theta1).unwrap();
            let gauss = HypothesisPair::gaussian_mean(0.0, mu).unwrap();
            let xb = if bit { 1.0 } else { 0.0 };
            for v in [truncated_llr(&bern, xb, trunc).unwrap(), truncated_llr(&gauss, x, trunc).unwrap()] {
                prop_assert!(v.abs() <= a);
                prop_assert_eq!(trunc.clip(v), v);
            }
            prop_assert!(sensitivity(&bern, trunc).unwrap() <= 2.0 * a);
            prop_assert!(sensitivity(&gauss, trunc).unwrap() <= 2.0 * a);
        }

        #[test]
        fn drift_constants_positive(
            theta0 in 0.01f64..0.99, theta1 in 0.01f64..0.99, mu in -3.0f64..3.0, a in 0.01f64..5.0
        ) {
            prop_assume!((theta0 - theta1).abs() > 1e-3 && mu.abs() > 1e-2);
            let gauss = drift_constants(&HypothesisPair::gaussian_mean(0.0, mu).unwrap(), t(a)).unwrap();
            prop_assert!(gauss.mu0 > 0.0 && gauss.mu1 > 0.0);
            // Bernoulli drifts are positive once clipping cannot flip a sign,
            // i.e. when A covers both raw LLR values.
            let bern = HypothesisPair::bernoulli(theta0, theta1).unwrap();
            let reach = llr(&bern, 0.0).unwrap().abs().max(llr(&bern, 1.0).unwrap().abs());
            let d = drift_constants(&bern, t(a.max(reach))).unwrap();
            prop_assert!(d.mu0 > 0.0 && d.mu1 > 0.0, "{:?}", d);
        }
    }
}
