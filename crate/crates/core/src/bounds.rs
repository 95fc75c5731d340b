//! Closed-form expected-sample-size and error-rate bounds of the private test,
//! minimized over the partition count `k` and the split constant `c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{drift_constants, HypothesisPair, TruncationSpec};
use crate::sprt::SprtThresholds;

pub const K_MAX: u32 = 64;
pub const C_GRID_POINTS: usize = 199;

/// Which expected sample size a bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    H0,
    H1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Type1,
    Type2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundComponent {
    pub name: &'static str,
    pub value: f64,
}

/// A bound minimized over a `(k, c)` grid. `value` is the sum of
/// `components` at the minimizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub k_star: u32,
    pub c_star: f64,
    pub components: Vec<BoundComponent>,
    /// Set when an error bound exceeds 1 and is therefore vacuous.
    pub exceeds_one: bool,
}

/// `c` candidates `0.005, 0.010, ..., 0.995`.
pub fn c_grid() -> Vec<f64> {
    (1..=C_GRID_POINTS).map(|i| i as f64 * 0.005).collect()
}

pub fn k_grid() -> Vec<u32> {
    (1..=K_MAX).collect()
}

struct Inputs {
    threshold: f64,
    mu: f64,
    a2: f64,
    noise: f64,
}

impl Inputs {
    fn new(threshold: f64, mu: f64, trunc: TruncationSpec, sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::param("threshold", format!("must be positive and finite, got {threshold}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::param("mu", format!("must be positive and finite, got {mu}")));
        }
        for (name, v) in [("sigma1", sigma1), ("sigma2", sigma2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        Ok(Self {
            threshold,
            mu,
            a2: trunc.value().powi(2),
            noise: (2.0 * (sigma1 * sigma1 + sigma2 * sigma2)).sqrt(),
        })
    }

    fn rho(&self, c: f64) -> f64 {
        -(-(1.0 - c) * self.mu * self.mu / (2.0 * self.a2)).exp_m1()
    }

    fn sample_size_components(&self, k: u32, c: f64) -> Vec<BoundComponent> {
        let scaled = self.threshold / ((1.0 - c) * self.mu);
        let k1 = (k + 1) as f64;
        vec![
            BoundComponent { name: "constant", value: 1.0 },
            BoundComponent { name: "main", value: scaled },
            BoundComponent {
                name: "partition",
                value: scaled / (2.0 * k1),
            },
            BoundComponent {
                name: "rho",
                value: k1 / self.rho(c),
            },
            BoundComponent {
                name: "noise",
                value: 3.0 * self.noise / (4.0 * (1.0 - c) * self.mu),
            },
        ]
    }

    fn error_components(&self, k: u32, c: f64) -> Vec<BoundComponent> {
        let kf = k as f64;
        let lead = 2.0 / self.rho(c) * (-2.0 * self.threshold * (1.0 - c) * self.mu / self.a2).exp();
        vec![
            BoundComponent {
                name: "exponential",
                value: lead * (1.0 + kf * (1.0 / (8.0 * kf)).exp()),
            },
            BoundComponent {
                name: "partition",
                value: lead * kf * (1.0 / (4.0 * kf + 3.0)).exp(),
            },
            BoundComponent {
                name: "noise",
                value: self.noise / (4.0 * (1.0 - c) * self.mu),
            },
        ]
    }
}

fn total(components: &[BoundComponent]) -> f64 {
    components.iter().map(|c| c.value).sum()
}

fn minimize(
    ks: &[u32],
    cs: &[f64],
    eval: impl Fn(u32, f64) -> Vec<BoundComponent>,
    flag_above_one: bool,
) -> Result<BoundResult> {
    let mut best: Option<BoundResult> = None;
    for &k in ks {
        if k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        for &c in cs {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::param("c", format!("must lie in (0, 1), got {c}")));
            }
            let components = eval(k, c);
            let value = total(&components);
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(BoundResult {
                    value,
                    k_star: k,
                    c_star: c,
                    components,
                    exceeds_one: flag_above_one && value > 1.0,
                });
            }
        }
    }
    best.ok_or_else(|| Error::param("grid", "needs at least one (k, c) candidate"))
}

/// Expected-sample-size bound
/// `1 + min_k min_c { b/((1-c)mu) + b/(2(k+1)(1-c)mu) + (k+1)/rho + 3 sqrt(2(s1^2+s2^2))/(4(1-c)mu) }`
/// with `rho = 1 - exp(-(1-c) mu^2 / (2A^2))`.
///
/// Pass `(b, mu1)` for `E1[T]` and `(a, mu0)` for `E0[T]`.
pub fn sample_size_bound(
    threshold: f64,
    mu: f64,
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
) -> Result<BoundResult> {
    sample_size_bound_on_grid(threshold, mu, trunc, sigma1, sigma2, &k_grid(), &c_grid())
}

pub fn sample_size_bound_on_grid(
    threshold: f64,
    mu: f64,
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
    ks: &[u32],
    cs: &[f64],
) -> Result<BoundResult> {
    let inputs = Inputs::new(threshold, mu, trunc, sigma1, sigma2)?;
    minimize(ks, cs, |k, c| inputs.sample_size_components(k, c), false)
}

/// The sample-size bound at a fixed `(k, c)`.
pub fn sample_size_bound_at(
    threshold: f64,
    mu: f64,
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
    k: u32,
    c: f64,
) -> Result<BoundResult> {
    sample_size_bound_on_grid(threshold, mu, trunc, sigma1, sigma2, &[k], &[c])
}

/// The simplified reading `1 + 1/rho + 5b/(2mu) + 3 sqrt(2(s1^2+s2^2))/(2mu)`
/// at `c = 1/2`. It carries `1/rho` where the bound at `k = 1` has `2/rho`.
pub fn sample_size_simplified(threshold: f64, mu: f64, trunc: TruncationSpec, sigma1: f64, sigma2: f64) -> Result<f64> {
    let inputs = Inputs::new(threshold, mu, trunc, sigma1, sigma2)?;
    Ok(1.0 + 1.0 / inputs.rho(0.5) + 5.0 * threshold / (2.0 * mu) + 3.0 * inputs.noise / (2.0 * mu))
}

/// Error-rate bound
/// `min_k min_c { 2/rho exp(-2b(1-c)mu/A^2) (1 + k e^{1/(8k)} + k e^{1/(4k+3)}) + sqrt(2(s1^2+s2^2))/(4(1-c)mu) }`.
///
/// Pass `(b, mu0)` for the Type I error and `(a, mu1)` for the Type II error.
/// The grid also tries `c = 1 - A^2/(2mu)` when it lies in `(0, 1)`.
pub fn error_rate_bound(
    threshold: f64,
    mu: f64,
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
) -> Result<BoundResult> {
    let mut cs = c_grid();
    let suggested = 1.0 - trunc.value().powi(2) / (2.0 * mu);
    if suggested > 0.0 && suggested < 1.0 {
        cs.push(suggested);
    }
    error_rate_bound_on_grid(threshold, mu, trunc, sigma1, sigma2, &k_grid(), &cs)
}

pub fn error_rate_bound_on_grid(
    threshold: f64,
    mu: f64,
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
    ks: &[u32],
    cs: &[f64],
) -> Result<BoundResult> {
    let inputs = Inputs::new(threshold, mu, trunc, sigma1, sigma2)?;
    minimize(ks, cs, |k, c| inputs.error_components(k, c), true)
}

pub fn error_rate_bound_at(
    threshold: f64,
    mu: f64,
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
    k: u32,
    c: f64,
) -> Result<BoundResult> {
    error_rate_bound_on_grid(threshold, mu, trunc, sigma1, sigma2, &[k], &[c])
}

/// Both sample-size bounds and both error bounds of a configuration, with the
/// threshold and drift pairing of each statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub mu0: f64,
    pub mu1: f64,
    pub e0: BoundResult,
    pub e1: BoundResult,
    pub type1: BoundResult,
    pub type2: BoundResult,
    /// Fixed choice `k = 1, c = 1/2` of the sample-size bounds.
    pub e0_at_k1_c_half: BoundResult,
    pub e1_at_k1_c_half: BoundResult,
    /// The simplified `1 + 1/rho + 5b/(2mu) + ...` reading.
    pub e0_simplified: f64,
    pub e1_simplified: f64,
}

pub fn bounds_report(
    pair: &HypothesisPair,
    thresholds: SprtThresholds,
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
) -> Result<BoundsReport> {
    thresholds.validate()?;
    let d = drift_constants(pair, trunc)?;
    let (a, b) = (thresholds.a, thresholds.b);
    Ok(BoundsReport {
        mu0: d.mu0,
        mu1: d.mu1,
        e0: sample_size_bound(a, d.mu0, trunc, sigma1, sigma2)?,
        e1: sample_size_bound(b, d.mu1, trunc, sigma1, sigma2)?,
        type1: error_rate_bound(b, d.mu0, trunc, sigma1, sigma2)?,
        type2: error_rate_bound(a, d.mu1, trunc, sigma1, sigma2)?,
        e0_at_k1_c_half: sample_size_bound_at(a, d.mu0, trunc, sigma1, sigma2, 1, 0.5)?,
        e1_at_k1_c_half: sample_size_bound_at(b, d.mu1, trunc, sigma1, sigma2, 1, 0.5)?,
        e0_simplified: sample_size_simplified(a, d.mu0, trunc, sigma1, sigma2)?,
        e1_simplified: sample_size_simplified(b, d.mu1, trunc, sigma1, sigma2)?,
    })
}
