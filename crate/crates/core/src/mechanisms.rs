//! Additive noise mechanisms and their privacy calibrations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::rng::RngStream;

/// Noise added to a scalar. A zero scale is a pass-through.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseMechanism {
    Gaussian { sigma: f64 },
    Laplace { scale: f64 },
    None,
}

impl NoiseMechanism {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        check_scale("sigma", sigma)?;
        Ok(NoiseMechanism::Gaussian { sigma })
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        check_scale("scale", scale)?;
        Ok(NoiseMechanism::Laplace { scale })
    }

    /// True when the mechanism adds no noise.
    pub fn is_noiseless(&self) -> bool {
        match *self {
            NoiseMechanism::Gaussian { sigma } => sigma == 0.0,
            NoiseMechanism::Laplace { scale } => scale == 0.0,
            NoiseMechanism::None => true,
        }
    }

    /// Draw one centered noise variate. Noiseless mechanisms consume nothing.
    #[inline]
    pub fn noise(&self, rng: &mut RngStream) -> f64 {
        match *self {
            NoiseMechanism::Gaussian { sigma } if sigma > 0.0 => sigma * rng.standard_normal(),
            NoiseMechanism::Laplace { scale } if scale > 0.0 => rng.laplace(scale),
            _ => 0.0,
        }
    }
}

fn check_scale(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and non-negative, got {v}")))
    }
}

#[inline]
pub fn perturb(mech: &NoiseMechanism, value: f64, rng: &mut RngStream) -> f64 {
    value + mech.noise(rng)
}

/// `sqrt(2 ln(1.25/delta)) * sensitivity / epsilon`.
pub fn gaussian_sigma(epsilon: f64, delta: f64, sensitivity: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("must be positive and finite, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return Err(Error::param("sensitivity", format!("must be positive and finite, got {sensitivity}")));
    }
    Ok((2.0 * (1.25 / delta).ln()).sqrt() * sensitivity / epsilon)
}

/// Laplace scales `(2Δ/ε, 4Δ/ε)` for the threshold and the queries of an
/// ε-DP above-threshold test.
pub fn laplace_scale_for_abovethresh(epsilon: f64, sensitivity: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("must be positive and finite, got {epsilon}")));
    }
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return Err(Error::param("sensitivity", format!("must be positive and finite, got {sensitivity}")));
    }
    Ok((2.0 * sensitivity / epsilon, 4.0 * sensitivity / epsilon))
}

/// Threshold and query noise scales of the private test at budget `eps_prime`.
///
/// Each branch gets `eps_prime / 2`; the threshold sees sensitivity `2A` and
/// the queries `4A`, so `sigma1^2 = 32 ln(1.25/delta) A^2 / eps'^2` and
/// `sigma2^2 = 4 sigma1^2`.
pub fn privsprt_sigmas(eps_prime: f64, delta: f64, a_trunc: f64) -> Result<(f64, f64)> {
    let half = eps_prime / 2.0;
    Ok((
        gaussian_sigma(half, delta, 2.0 * a_trunc)?,
        gaussian_sigma(half, delta, 4.0 * a_trunc)?,
    ))
}

/// Laplace scales of the above-threshold baseline at total budget `epsilon`,
/// split evenly across the two branches, for a statistic of sensitivity `2A`.
pub fn laplace_baseline_scales(epsilon: f64, a_trunc: f64) -> Result<(f64, f64)> {
    laplace_scale_for_abovethresh(epsilon / 2.0, 2.0 * a_trunc)
}
