//! Shared fixtures for the benchmarks.

use privsprt_core::simulation::NoiseSource;
use privsprt_core::{ExperimentConfig, HypothesisPair, PrivTestConfig, SprtThresholds, TruncationSpec};

pub const BENCH_SEED: u64 = 7;

/// Bernoulli(0.7) vs Bernoulli(0.2) at `A = 0.5`, `eps' = 1`, `a = b = 43`.
pub fn bernoulli_private(n_trials: u64) -> ExperimentConfig {
    ExperimentConfig::new(
        HypothesisPair::bernoulli(0.7, 0.2).expect("valid pair"),
        SprtThresholds::symmetric(43.0).expect("valid thresholds"),
        TruncationSpec::new(0.5).expect("valid truncation"),
        NoiseSource::Gaussian {
            epsilon_prime: 1.0,
            delta: 1e-5,
        },
        None,
        n_trials,
        BENCH_SEED,
    )
    .expect("valid experiment")
}

/// Wald's SPRT on unit-variance Gaussian means 0 vs 1 at `a = b = log 19`.
pub fn gaussian_noiseless(n_trials: u64) -> ExperimentConfig {
    ExperimentConfig::new(
        HypothesisPair::gaussian_mean(0.0, 1.0).expect("valid pair"),
        SprtThresholds::symmetric(19f64.ln()).expect("valid thresholds"),
        TruncationSpec::new(1.0).expect("valid truncation"),
        NoiseSource::None,
        None,
        n_trials,
        BENCH_SEED,
    )
    .expect("valid experiment")
}

/// Test configuration used by the accounting benchmarks.
pub fn accounting_test() -> (HypothesisPair, PrivTestConfig) {
    let cfg = bernoulli_private(1);
    (cfg.pair, cfg.test)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(bernoulli_private(10).n_trials, 10);
        assert!(gaussian_noiseless(1).test.thresholds.a > 2.9);
        assert!(accounting_test().1.is_private());
    }
}
