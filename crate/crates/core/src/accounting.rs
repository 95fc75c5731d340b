//! Renyi-DP accounting for the private SPRT.
//!
//! Curves are closures `alpha -> epsilon(alpha)` tagged with a provenance
//! string. The private test's curve needs the moments `T_A`, `T_B` of the
//! conditional expected stopping time given the threshold noise; these are
//! estimated by Monte Carlo over the noise in log space.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{drift_constants, HypothesisPair, TruncationSpec};
use crate::rng::RngStream;
use crate::sequential_private::{PrivTestConfig, TestMode};
use crate::sprt::SprtThresholds;

/// Smallest and largest Renyi orders searched by [`rdp_to_dp`].
pub const ALPHA_MIN: f64 = 1.01;
pub const ALPHA_MAX: f64 = 512.0;
pub const ALPHA_GRID_POINTS: usize = 64;
/// Moment orders searched by [`best_dp_report`].
pub const GAMMA_GRID: [f64; 7] = [1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0];
/// Partition constant used inside the stopping-time bracket.
pub const DEFAULT_C: f64 = 0.5;
/// Noise draws per moment estimate in [`best_dp_report`].
pub const DEFAULT_NOISE_DRAWS: usize = 20_000;
pub const MIN_NOISE_DRAWS: usize = 1_000;
const MOMENT_SEED: u64 = 0x7A7B_0001;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A Renyi-DP curve `alpha -> epsilon(alpha)` on `(1, inf)`.
#[derive(Clone)]
pub struct RdpCurve {
    eval: Evaluator,
    provenance: String,
}

impl fmt::Debug for RdpCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RdpCurve").field("provenance", &self.provenance).finish()
    }
}

impl RdpCurve {
    pub fn new(provenance: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            provenance: provenance.into(),
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0)
    }

    pub fn constant(eps: f64) -> Self {
        Self::new(format!("constant({eps})"), move |_| eps)
    }

    /// Gaussian mechanism: `alpha * sensitivity^2 / (2 sigma^2)`.
    pub fn gaussian(sensitivity: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", format!("must be positive and finite, got {sigma}")));
        }
        let k = sensitivity * sensitivity / (2.0 * sigma * sigma);
        Ok(Self::new(format!("gaussian(sensitivity={sensitivity}, sigma={sigma})"), move |a| a * k))
    }

    #[inline]
    pub fn eval(&self, alpha: f64) -> f64 {
        (self.eval)(alpha)
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

/// Pointwise sum of curves.
pub fn compose_rdp(curves: &[RdpCurve]) -> Result<RdpCurve> {
    if curves.is_empty() {
        return Err(Error::param("curves", "need at least one curve"));
    }
    let parts: Vec<RdpCurve> = curves.to_vec();
    let provenance = format!(
        "compose[{}]",
        parts.iter().map(|c| c.provenance.as_str()).collect::<Vec<_>>().join(", ")
    );
    Ok(RdpCurve::new(provenance, move |a| parts.iter().map(|c| c.eval(a)).sum()))
}

/// The `ALPHA_GRID_POINTS` log-spaced orders in `[ALPHA_MIN, ALPHA_MAX]`.
pub fn alpha_grid() -> Vec<f64> {
    let (lo, hi) = (ALPHA_MIN.ln(), ALPHA_MAX.ln());
    let n = ALPHA_GRID_POINTS;
    (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Best `(epsilon, alpha*)` with `epsilon = eps(alpha) + ln(1/delta)/(alpha-1)`.
///
/// Grid search over [`alpha_grid`] followed by golden-section refinement in
/// the bracket around the best grid point.
pub fn rdp_to_dp(curve: &RdpCurve, delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let penalty = (1.0 / delta).ln();
    let objective = |a: f64| {
        let v = curve.eval(a) + penalty / (a - 1.0);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let grid = alpha_grid();
    let values: Vec<f64> = grid.iter().map(|&a| objective(a)).collect();
    let (best_i, &best_v) = values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("grid is non-empty");
    if !best_v.is_finite() {
        return Err(Error::Numerical(format!("curve `{}` is infinite on the whole order grid", curve.provenance)));
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let (a_ref, v_ref) = golden_section(objective, lo, hi);
    Ok(if v_ref < best_v {
        (v_ref, a_ref)
    } else {
        (best_v, grid[best_i])
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Stopping-time term of the above-threshold RDP bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingTerm {
    /// `sup_z E[T | Z1 = z]`.
    Sup(f64),
    /// `ln E_Z[E[T | Z1]^gamma]` with its order `gamma > 1`.
    Moment { gamma: f64, log_moment: f64 },
}

/// Renyi divergence bound of one above-threshold test at order `alpha`.
///
/// `Sup`: `eps1(alpha) + eps2(alpha) + ln(sup)/(alpha-1)`.
/// `Moment`: `(alpha - (gamma-1)/gamma)/(alpha-1) * eps1(gamma alpha/(gamma-1))
/// + eps2(alpha) + ln(moment)/(gamma (alpha-1))`.
pub fn gen_above_thresh_rdp(alpha: f64, eps1: &RdpCurve, eps2: &RdpCurve, term: StoppingTerm) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::param("alpha", format!("must exceed 1, got {alpha}")));
    }
    let v = match term {
        StoppingTerm::Sup(s) => {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Numerical(format!("stopping term {s} is not finite and positive")));
            }
            eps1.eval(alpha) + eps2.eval(alpha) + s.ln() / (alpha - 1.0)
        }
        StoppingTerm::Moment { gamma, log_moment } => {
            if !(gamma > 1.0) {
                return Err(Error::param("gamma", format!("must exceed 1, got {gamma}")));
            }
            if !log_moment.is_finite() {
                return Err(Error::Numerical("stopping moment is not finite".into()));
            }
            let lifted = gamma * alpha / (gamma - 1.0);
            (alpha - (gamma - 1.0) / gamma) / (alpha - 1.0) * eps1.eval(lifted)
                + eps2.eval(alpha)
                + log_moment / (gamma * (alpha - 1.0))
        }
    };
    Ok(v)
}

/// Monte Carlo estimate of `E_Z[bracket(Z)^gamma]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StoppingMoment {
    pub gamma: f64,
    pub value: f64,
    /// `ln(value)`; finite even when `value` overflows.
    pub log_value: f64,
    pub std_error: f64,
    pub n_draws: usize,
}

/// Moments `(T_A, T_B)` of the conditional expected stopping time.
///
/// `T_A = E_Z[1 + 1/rho1 + (5(a+Z) + 3 sqrt(2) sigma2)/(2 mu0)]^gamma` and
/// `T_B` likewise with `b`, `rho0`, `mu1`, where
/// `rho0 = 1 - exp(-(1-c) mu1^2 / (2A^2))`, `rho1 = 1 - exp(-(1-c) mu0^2 / (2A^2))`
/// and `Z ~ N(0, sigma1^2)`. The bracket bounds `E[T | Z] >= 1` and is floored
/// at 1.
#[allow(clippy::too_many_arguments)]
pub fn estimate_ta_tb(
    pair: &HypothesisPair,
    thresholds: SprtThresholds,
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
    gamma: f64,
    c: f64,
    n_noise_draws: usize,
) -> Result<(StoppingMoment, StoppingMoment)> {
    thresholds.validate()?;
    if n_noise_draws < MIN_NOISE_DRAWS {
        return Err(Error::param("n_noise_draws", format!("need at least {MIN_NOISE_DRAWS}, got {n_noise_draws}")));
    }
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must be finite and at least 1, got {gamma}")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::param("c", format!("must lie in (0, 1), got {c}")));
    }
    for (name, v) in [("sigma1", sigma1), ("sigma2", sigma2)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("must be finite and non-negative, got {v}")));
        }
    }
    let drift = drift_constants(pair, trunc)?;
    if !(drift.mu0 > 0.0 && drift.mu1 > 0.0) {
        return Err(Error::Domain("drift constants must be positive".into()));
    }
    let a2 = trunc.value().powi(2);
    let rho = |mu: f64| -(-(1.0 - c) * mu * mu / (2.0 * a2)).exp_m1();
    let rho0 = rho(drift.mu1);
    let rho1 = rho(drift.mu0);
    let spec_a = Bracket {
        threshold: thresholds.a,
        rho: rho1,
        mu: drift.mu0,
    };
    let spec_b = Bracket {
        threshold: thresholds.b,
        rho: rho0,
        mu: drift.mu1,
    };
    Ok((
        spec_a.moment(sigma1, sigma2, gamma, n_noise_draws, 0),
        spec_b.moment(sigma1, sigma2, gamma, n_noise_draws, 1),
    ))
}

struct Bracket {
    threshold: f64,
    rho: f64,
    mu: f64,
}

impl Bracket {
    fn log_value(&self, z: f64, sigma2: f64) -> f64 {
        let v = 1.0 + 1.0 / self.rho + (5.0 * (self.threshold + z) + 3.0 * 2f64.sqrt() * sigma2) / (2.0 * self.mu);
        v.max(1.0).ln()
    }

    fn moment(&self, sigma1: f64, sigma2: f64, gamma: f64, n: usize, path: u64) -> StoppingMoment {
        if sigma1 == 0.0 {
            let log_value = gamma * self.log_value(0.0, sigma2);
            return StoppingMoment {
                gamma,
                value: log_value.exp(),
                log_value,
                std_error: 0.0,
                n_draws: n,
            };
        }
        let mut rng = RngStream::from_path(MOMENT_SEED, &[path]);
        let logs: Vec<f64> = (0..n)
            .map(|_| gamma * self.log_value(sigma1 * rng.standard_normal(), sigma2))
            .collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let nf = n as f64;
        let scaled: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let mean = scaled.iter().sum::<f64>() / nf;
        let var = scaled.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let log_value = m + mean.ln();
        StoppingMoment {
            gamma,
            value: log_value.exp(),
            log_value,
            std_error: m.exp() * (var / nf).sqrt(),
            n_draws: n,
        }
    }
}

fn check_private_sigmas(sigma1: f64, sigma2: f64) -> Result<()> {
    if sigma1 > 0.0 && sigma2 > 0.0 && sigma1.is_finite() && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "non-private configuration: zero noise gives an unbounded privacy loss".into(),
        ))
    }
}

fn moment_coefficient(alpha: f64, gamma: f64) -> f64 {
    (alpha * gamma / (gamma - 1.0) - 1.0) / (alpha - 1.0)
}

/// RDP curve of the private test:
/// `K(alpha) 2 alpha A^2/sigma1^2 + 4 alpha A^2/sigma2^2 + 2 ln max(T_A, T_B)/(gamma (alpha-1))`
/// with `K(alpha) = (alpha gamma/(gamma-1) - 1)/(alpha-1)`.
pub fn privsprt_rdp_curve(
    trunc: TruncationSpec,
    sigma1: f64,
    sigma2: f64,
    gamma: f64,
    t_a: &StoppingMoment,
    t_b: &StoppingMoment,
) -> Result<RdpCurve> {
    check_private_sigmas(sigma1, sigma2)?;
    if !(gamma > 1.0) {
        return Err(Error::param("gamma", format!("must exceed 1, got {gamma}")));
    }
    let a2 = trunc.value().powi(2);
    let log_max = t_a.log_value.max(t_b.log_value);
    let (k1, k2) = (2.0 * a2 / (sigma1 * sigma1), 4.0 * a2 / (sigma2 * sigma2));
    Ok(RdpCurve::new(
        format!("privsprt(A={}, sigma1={sigma1}, sigma2={sigma2}, gamma={gamma})", trunc.value()),
        move |a| moment_coefficient(a, gamma) * k1 * a + k2 * a + 2.0 * log_max / (gamma * (a - 1.0)),
    ))
}

/// The private test's curve with `sigma1, sigma2` substituted from the
/// `(eps'/2, delta)` Gaussian calibration:
/// `alpha eps'^2 / (16 ln(1.25/delta)) (K(alpha) + 1/2) + 2 ln M/(gamma (alpha-1))`.
pub fn calibrated_privsprt_rdp_curve(eps_prime: f64, delta: f64, gamma: f64, log_max_moment: f64) -> Result<RdpCurve> {
    if !(eps_prime > 0.0 && eps_prime.is_finite()) {
        return Err(Error::param("eps_prime", format!("must be positive and finite, got {eps_prime}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if !(gamma > 1.0) {
        return Err(Error::param("gamma", format!("must exceed 1, got {gamma}")));
    }
    let scale = eps_prime * eps_prime / (16.0 * (1.25 / delta).ln());
    Ok(RdpCurve::new(
        format!("privsprt-calibrated(eps'={eps_prime}, delta={delta}, gamma={gamma})"),
        move |a| a * scale * (moment_coefficient(a, gamma) + 0.5) + 2.0 * log_max_moment / (gamma * (a - 1.0)),
    ))
}

/// The corollary curve exactly as printed:
/// `(K(alpha) + 1) eps' + 2 ln M/(alpha-1)`.
///
/// It is not an algebraic specialization of [`privsprt_rdp_curve`]; it is
/// exposed for side-by-side reporting only.
pub fn printed_corollary_rdp_curve(eps_prime: f64, gamma: f64, log_max_moment: f64) -> Result<RdpCurve> {
    if !(gamma > 1.0) {
        return Err(Error::param("gamma", format!("must exceed 1, got {gamma}")));
    }
    Ok(RdpCurve::new(
        format!("printed-corollary(eps'={eps_prime}, gamma={gamma})"),
        move |a| (moment_coefficient(a, gamma) + 1.0) * eps_prime + 2.0 * log_max_moment / (a - 1.0),
    ))
}

/// Bounded-length fallback for two parallel threshold tests capped at `t_max`:
/// `2 alpha A^2/sigma1^2 + 4 alpha A^2/sigma2^2 + 2 ln(1 + t_max)/(alpha-1)`.
pub fn bounded_length_rdp_curve(trunc: TruncationSpec, sigma1: f64, sigma2: f64, t_max: u64) -> Result<RdpCurve> {
    check_private_sigmas(sigma1, sigma2)?;
    let a2 = trunc.value().powi(2);
    let (k1, k2) = (2.0 * a2 / (sigma1 * sigma1), 4.0 * a2 / (sigma2 * sigma2));
    let log_t = (1.0 + t_max as f64).ln();
    Ok(RdpCurve::new(
        format!("bounded-length(t_max={t_max})"),
        move |a| (k1 + k2) * a + 2.0 * log_t / (a - 1.0),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaCandidate {
    pub gamma: f64,
    pub epsilon: f64,
    pub alpha_star: f64,
    pub log_max_moment: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FallbackReport {
    pub t_max: u64,
    pub epsilon: f64,
    pub alpha_star: f64,
}

/// Best `(epsilon, delta)` guarantee of a private configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpReport {
    pub epsilon: f64,
    pub delta: f64,
    pub alpha_star: f64,
    pub gamma_star: f64,
    pub t_a: StoppingMoment,
    pub t_b: StoppingMoment,
    pub sigma1: f64,
    pub sigma2: f64,
    #[serde(rename = "A")]
    pub a_trunc: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub c: f64,
    pub candidates: Vec<GammaCandidate>,
    /// The capped-length bound for comparison.
    pub bounded_length: FallbackReport,
    /// `(alpha, epsilon(alpha))` of the winning curve on the order grid.
    pub curve: Vec<(f64, f64)>,
}

/// Joint search over [`GAMMA_GRID`] and the order grid.
pub fn best_dp_report(pair: &HypothesisPair, cfg: &PrivTestConfig, delta: f64) -> Result<DpReport> {
    best_dp_report_with(pair, cfg, delta, DEFAULT_NOISE_DRAWS)
}

pub fn best_dp_report_with(
    pair: &HypothesisPair,
    cfg: &PrivTestConfig,
    delta: f64,
    n_noise_draws: usize,
) -> Result<DpReport> {
    cfg.validate()?;
    if cfg.mode != TestMode::GaussianPrivSprt {
        return Err(Error::Unsupported(format!(
            "Renyi accounting applies to gaussian_priv_sprt, not {:?}",
            cfg.mode
        )));
    }
    check_private_sigmas(cfg.sigma1, cfg.sigma2)?;
    let drift = drift_constants(pair, cfg.trunc)?;
    let mut best: Option<(GammaCandidate, StoppingMoment, StoppingMoment, RdpCurve)> = None;
    let mut candidates = Vec::with_capacity(GAMMA_GRID.len());
    for gamma in GAMMA_GRID {
        let (t_a, t_b) = estimate_ta_tb(
            pair,
            cfg.thresholds,
            cfg.trunc,
            cfg.sigma1,
            cfg.sigma2,
            gamma,
            DEFAULT_C,
            n_noise_draws,
        )?;
        let curve = privsprt_rdp_curve(cfg.trunc, cfg.sigma1, cfg.sigma2, gamma, &t_a, &t_b)?;
        let (epsilon, alpha_star) = rdp_to_dp(&curve, delta)?;
        let cand = GammaCandidate {
            gamma,
            epsilon,
            alpha_star,
            log_max_moment: t_a.log_value.max(t_b.log_value),
        };
        candidates.push(cand);
        if best.as_ref().is_none_or(|b| epsilon < b.0.epsilon) {
            best = Some((cand, t_a, t_b, curve));
        }
    }
    let (cand, t_a, t_b, curve) = best.expect("gamma grid is non-empty");
    let fallback_curve = bounded_length_rdp_curve(cfg.trunc, cfg.sigma1, cfg.sigma2, cfg.t_max)?;
    let (fb_eps, fb_alpha) = rdp_to_dp(&fallback_curve, delta)?;
    Ok(DpReport {
        epsilon: cand.epsilon,
        delta,
        alpha_star: cand.alpha_star,
        gamma_star: cand.gamma,
        t_a,
        t_b,
        sigma1: cfg.sigma1,
        sigma2: cfg.sigma2,
        a_trunc: cfg.trunc.value(),
        mu0: drift.mu0,
        mu1: drift.mu1,
        c: DEFAULT_C,
        candidates,
        bounded_length: FallbackReport {
            t_max: cfg.t_max,
            epsilon: fb_eps,
            alpha_star: fb_alpha,
        },
        curve: alpha_grid().into_iter().map(|a| (a, curve.eval(a))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::privsprt_sigmas;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn t(a: f64) -> TruncationSpec {
        TruncationSpec::new(a).unwrap()
    }

    fn moment(gamma: f64, log_value: f64) -> StoppingMoment {
        StoppingMoment {
            gamma,
            value: log_value.exp(),
            log_value,
            std_error: 0.0,
            n_draws: MIN_NOISE_DRAWS,
        }
    }

    #[test]
    fn composition_examples() {
        let g = RdpCurve::gaussian(1.0, 2.0).unwrap();
        let h = RdpCurve::gaussian(3.0, 1.5).unwrap();
        let with_zero = compose_rdp(&[g.clone(), RdpCurve::zero()]).unwrap();
        let gg = compose_rdp(&[g.clone(), g.clone()]).unwrap();
        let gh = compose_rdp(&[g.clone(), h.clone()]).unwrap();
        let hg = compose_rdp(&[h.clone(), g.clone()]).unwrap();
        for a in alpha_grid() {
            assert_eq!(with_zero.eval(a), g.eval(a));
            assert_eq!(gg.eval(a), a * 1.0 / 4.0);
            assert_eq!(gh.eval(a), hg.eval(a));
        }
        assert!(compose_rdp(&[]).is_err());
    }

    #[test]
    fn conversion_examples() {
        let c = RdpCurve::constant(1.0);
        let (eps, alpha) = rdp_to_dp(&c, 0.01).unwrap();
        assert!(eps <= 1.0 + 100f64.ln());
        assert!(alpha > 1.0 && alpha <= ALPHA_MAX);
        // Constant curve: penalty decreases in alpha, so the optimum is at the top.
        assert_relative_eq!(eps, 1.0 + 100f64.ln() / (ALPHA_MAX - 1.0), max_relative = 1e-9);
        let (near_one, _) = rdp_to_dp(&RdpCurve::gaussian(1.0, 1.0).unwrap(), 1.0 - 1e-12).unwrap();
        assert!(near_one < 0.51);
        assert!(rdp_to_dp(&RdpCurve::new("inf", |_| f64::INFINITY), 0.1).is_err());
        assert!(rdp_to_dp(&c, 1.0).is_err());
    }

    #[test]
    fn gaussian_conversion_matches_closed_form() {
        // eps(alpha) = alpha r: minimum at alpha = 1 + sqrt(L/r), value r + 2 sqrt(r L).
        let r = 0.01;
        let delta: f64 = 1e-5;
        let l = (1.0 / delta).ln();
        let curve = RdpCurve::new("linear", move |a| a * r);
        let (eps, alpha) = rdp_to_dp(&curve, delta).unwrap();
        assert_relative_eq!(eps, r + 2.0 * (r * l).sqrt(), max_relative = 1e-9);
        assert_relative_eq!(alpha, 1.0 + (l / r).sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn conversion_is_monotone_in_delta() {
        let curve = RdpCurve::gaussian(1.0, 3.0).unwrap();
        let mut prev = 0.0;
        for i in 1..=10 {
            let delta = 10f64.powf(-(i as f64));
            let (eps, _) = rdp_to_dp(&curve, delta).unwrap();
            assert!(eps >= prev, "delta {delta}");
            prev = eps;
        }
    }

    #[test]
    fn above_thresh_bound_examples() {
        let e1 = RdpCurve::gaussian(1.0, 2.0).unwrap();
        let e2 = RdpCurve::gaussian(2.0, 2.0).unwrap();
        let a = 3.0;
        assert_eq!(
            gen_above_thresh_rdp(a, &e1, &e2, StoppingTerm::Sup(1.0)).unwrap(),
            e1.eval(a) + e2.eval(a)
        );
        let t_max = 999.0;
        assert_relative_eq!(
            gen_above_thresh_rdp(a, &e1, &e2, StoppingTerm::Sup(1.0 + t_max)).unwrap(),
            e1.eval(a) + e2.eval(a) + (1.0 + t_max).ln() / (a - 1.0),
            max_relative = 1e-15
        );
        // A point mass E[T|Z] = s has moment s^gamma; large gamma recovers the sup form.
        let s: f64 = 40.0;
        let sup = gen_above_thresh_rdp(a, &e1, &e2, StoppingTerm::Sup(s)).unwrap();
        let gamma = 1e3;
        let mom = gen_above_thresh_rdp(
            a,
            &e1,
            &e2,
            StoppingTerm::Moment {
                gamma,
                log_moment: gamma * s.ln(),
            },
        )
        .unwrap();
        assert_relative_eq!(mom, sup, max_relative = 2e-3);
        assert!(gen_above_thresh_rdp(1.0, &e1, &e2, StoppingTerm::Sup(1.0)).is_err());
        assert!(gen_above_thresh_rdp(a, &e1, &e2, StoppingTerm::Sup(f64::INFINITY)).is_err());
    }

    #[test]
    fn moment_form_matches_theorem_per_instance() {
        // With eps1 = alpha A^2/sigma1^2 and eps2 = 2 alpha A^2/sigma2^2, one
        // instance is half the private test's curve.
        let (a_tr, s1, s2, gamma, lm) = (0.5, 3.0, 5.0, 2.0, 4.0);
        let e1 = RdpCurve::new("e1", move |a| a * a_tr * a_tr / (s1 * s1));
        let e2 = RdpCurve::new("e2", move |a| 2.0 * a * a_tr * a_tr / (s2 * s2));
        let curve = privsprt_rdp_curve(t(a_tr), s1, s2, gamma, &moment(gamma, lm), &moment(gamma, 0.0)).unwrap();
        for alpha in alpha_grid() {
            let one = gen_above_thresh_rdp(alpha, &e1, &e2, StoppingTerm::Moment { gamma, log_moment: lm }).unwrap();
            assert_relative_eq!(2.0 * one, curve.eval(alpha), max_relative = 1e-12);
        }
    }

    #[test]
    fn ta_tb_degenerate_and_closed_form() {
        let pair = HypothesisPair::gaussian_mean(0.0, 1.0).unwrap();
        let th = SprtThresholds::symmetric(4.0).unwrap();
        let (ta, tb) = estimate_ta_tb(&pair, th, t(0.5), 0.0, 0.0, 1.0, 0.5, 1000).unwrap();
        // Frozen from an independent evaluation: mu1 = 0.184373..., rho0 = 0.0334222...
        assert_relative_eq!(tb.value, 85.158_065_024_847_1, max_relative = 1e-9);
        assert_eq!(tb.std_error, 0.0);
        assert_relative_eq!(ta.value, tb.value, max_relative = 1e-12);

        let d = drift_constants(&pair, t(0.5)).unwrap();
        let rho0 = 1.0 - (-(0.5) * d.mu1 * d.mu1 / (2.0 * 0.25)).exp();
        let sigma2 = 2.0;
        let (_, tb2) = estimate_ta_tb(&pair, th, t(0.5), 0.0, sigma2, 1.0, 0.5, 1000).unwrap();
        let expected = 1.0 + 1.0 / rho0 + (5.0 * 4.0 + 3.0 * 2f64.sqrt() * sigma2) / (2.0 * d.mu1);
        assert_relative_eq!(tb2.value, expected, max_relative = 1e-12);
        assert!(estimate_ta_tb(&pair, th, t(0.5), 1.0, 1.0, 2.0, 0.5, 999).is_err());
    }

    #[test]
    fn ta_tb_pairing_follows_statement() {
        // Bernoulli(0.7, 0.2) has mu0 = 0.4A < mu1 = 0.6A, so T_A (a, mu0, rho1) is larger at a = b.
        let pair = HypothesisPair::bernoulli(0.7, 0.2).unwrap();
        let th = SprtThresholds::symmetric(10.0).unwrap();
        let (ta, tb) = estimate_ta_tb(&pair, th, t(0.5), 0.0, 1.0, 1.0, 0.5, 1000).unwrap();
        let rho1 = -(-(0.5) * 0.04 / 0.5f64).exp_m1();
        let expected = 1.0 + 1.0 / rho1 + (50.0 + 3.0 * 2f64.sqrt()) / 0.4;
        assert_relative_eq!(ta.value, expected, max_relative = 1e-12);
        assert!(ta.value > tb.value);
    }

    #[test]
    fn ta_tb_floor_and_error_scaling() {
        let pair = HypothesisPair::gaussian_mean(0.0, 1.0).unwrap();
        let th = SprtThresholds::symmetric(1.0).unwrap();
        // Huge threshold noise makes many brackets negative; the floor keeps values >= 1.
        let (ta, _) = estimate_ta_tb(&pair, th, t(0.5), 1e4, 0.0, 2.0, 0.5, 4000).unwrap();
        assert!(ta.value >= 1.0 && ta.value.is_finite());

        let (small, _) = estimate_ta_tb(&pair, th, t(0.5), 3.0, 1.0, 2.0, 0.5, 4_000).unwrap();
        let (large, _) = estimate_ta_tb(&pair, th, t(0.5), 3.0, 1.0, 2.0, 0.5, 16_000).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn curve_sigma_scaling() {
        let (ta, tb) = (moment(2.0, 1.5), moment(2.0, 0.7));
        let c1 = privsprt_rdp_curve(t(0.5), 2.0, 3.0, 2.0, &ta, &tb).unwrap();
        let c2 = privsprt_rdp_curve(t(0.5), 4.0, 6.0, 2.0, &ta, &tb).unwrap();
        let t_term = |a: f64| 2.0 * 1.5 / (2.0 * (a - 1.0));
        for a in alpha_grid() {
            assert_relative_eq!((c1.eval(a) - t_term(a)) / 4.0, c2.eval(a) - t_term(a), max_relative = 1e-10);
        }
        let unit = privsprt_rdp_curve(t(0.5), 2.0, 3.0, 2.0, &moment(2.0, 0.0), &moment(2.0, 0.0)).unwrap();
        let a = 7.0;
        let direct = moment_coefficient(a, 2.0) * 2.0 * a * 0.25 / 4.0 + 4.0 * a * 0.25 / 9.0;
        assert_relative_eq!(unit.eval(a), direct, max_relative = 1e-14);
        assert!(privsprt_rdp_curve(t(0.5), 0.0, 3.0, 2.0, &ta, &tb).is_err());
    }

    #[test]
    fn calibrated_curve_agrees_with_general_curve() {
        for (eps_prime, delta, a_tr, lm) in [(1.0, 1e-5, 0.5, 3.2), (0.5, 1e-6, 0.2, 5.0), (2.0, 1e-3, 1.0, 0.0)] {
            let (s1, s2) = privsprt_sigmas(eps_prime, delta, a_tr).unwrap();
            for gamma in GAMMA_GRID {
                let general = privsprt_rdp_curve(t(a_tr), s1, s2, gamma, &moment(gamma, lm), &moment(gamma, lm)).unwrap();
                let special = calibrated_privsprt_rdp_curve(eps_prime, delta, gamma, lm).unwrap();
                for a in alpha_grid() {
                    assert_relative_eq!(general.eval(a), special.eval(a), max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn printed_corollary_differs_from_theorem() {
        let gamma = 2.0;
        let printed = printed_corollary_rdp_curve(1.0, gamma, 0.0).unwrap();
        let derived = calibrated_privsprt_rdp_curve(1.0, 1e-5, gamma, 0.0).unwrap();
        assert!(printed.eval(4.0) > derived.eval(4.0));
    }

    #[test]
    fn dp_report_pipeline() {
        let pair = HypothesisPair::bernoulli(0.7, 0.2).unwrap();
        let th = SprtThresholds::symmetric(43.0).unwrap();
        let cfg = PrivTestConfig::calibrated_gaussian(th, t(0.5), 1.0, 1e-5, 100_000).unwrap();
        let report = best_dp_report_with(&pair, &cfg, 1e-5, 2_000).unwrap();
        assert!(report.epsilon.is_finite() && report.epsilon > 0.0);
        assert!(GAMMA_GRID.contains(&report.gamma_star));
        assert_eq!(report.candidates.len(), GAMMA_GRID.len());
        assert_abs_diff_eq!(report.mu0, 0.2, epsilon = 1e-12);
        assert!(report.bounded_length.epsilon.is_finite());
        assert_eq!(report.curve.len(), ALPHA_GRID_POINTS);

        // Dominates the single point (alpha, gamma) = (2, 2).
        let (ta, tb) = estimate_ta_tb(&pair, th, t(0.5), cfg.sigma1, cfg.sigma2, 2.0, DEFAULT_C, 2_000).unwrap();
        let curve = privsprt_rdp_curve(t(0.5), cfg.sigma1, cfg.sigma2, 2.0, &ta, &tb).unwrap();
        assert!(report.epsilon <= curve.eval(2.0) + (1e5f64).ln());
    }

    #[test]
    fn dp_report_grows_as_noise_shrinks() {
        let pair = HypothesisPair::gaussian_mean(0.0, 1.0).unwrap();
        let th = SprtThresholds::symmetric(4.0).unwrap();
        let mut prev = 0.0;
        for eps_prime in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let cfg = PrivTestConfig::calibrated_gaussian(th, t(0.5), eps_prime, 1e-5, 10_000).unwrap();
            let r = best_dp_report_with(&pair, &cfg, 1e-5, 2_000).unwrap();
            assert!(r.epsilon > prev, "eps' {eps_prime}: {} <= {prev}", r.epsilon);
            prev = r.epsilon;
        }
    }

    #[test]
    fn dp_report_rejects_non_private() {
        let pair = HypothesisPair::gaussian_mean(0.0, 1.0).unwrap();
        let th = SprtThresholds::symmetric(4.0).unwrap();
        let cfg = PrivTestConfig::non_private(th, t(0.5), 1000).unwrap();
        assert!(matches!(best_dp_report(&pair, &cfg, 1e-5), Err(Error::Unsupported(_))));
        let zero = PrivTestConfig::gaussian(th, t(0.5), 0.0, 0.0, 1000).unwrap();
        assert!(matches!(best_dp_report(&pair, &zero, 1e-5), Err(Error::Unsupported(_))));
    }

    proptest! {
        #[test]
        fn gaussian_and_composed_curves_are_monotone(
            d1 in 0.01f64..10.0, s1 in 0.1f64..100.0, d2 in 0.01f64..10.0, s2 in 0.1f64..100.0
        ) {
            let c = compose_rdp(&[RdpCurve::gaussian(d1, s1).unwrap(), RdpCurve::gaussian(d2, s2).unwrap()]).unwrap();
            let grid = alpha_grid();
            for w in grid.windows(2) {
                prop_assert!(c.eval(w[0]) >= 0.0);
                prop_assert!(c.eval(w[1]) >= c.eval(w[0]));
            }
        }

        #[test]
        fn larger_curve_converts_to_larger_epsilon(r in 1e-4f64..1.0, extra in 0.0f64..2.0, delta in 1e-10f64..0.5) {
            let small = RdpCurve::new("small", move |a| a * r);
            let big = RdpCurve::new("big", move |a| a * r + extra);
            prop_assert!(rdp_to_dp(&big, delta).unwrap().0 >= rdp_to_dp(&small, delta).unwrap().0);
        }

        #[test]
        fn private_curves_are_finite(
            s1 in 0.1f64..100.0, s2 in 0.1f64..100.0, gi in 0usize..7, lm in 0.0f64..50.0, a_tr in 0.01f64..5.0
        ) {
            let gamma = GAMMA_GRID[gi];
            let c = privsprt_rdp_curve(t(a_tr), s1, s2, gamma, &moment(gamma, lm), &moment(gamma, lm)).unwrap();
            for a in alpha_grid() {
                let v = c.eval(a);
                prop_assert!(v.is_finite() && v >= 0.0);
            }
        }
    }
}
