//! Differentially private sequential probability ratio tests.
//!
//! The crate provides Wald's SPRT, a private variant that runs two noisy
//! above-threshold tests on a clipped log-likelihood ratio, a Laplace
//! above-threshold baseline, Renyi-DP accounting for the private test,
//! closed-form sample-size and error bounds, and a deterministic parallel
//! Monte Carlo harness.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accounting;
pub mod bounds;
pub mod error;
pub mod mechanisms;
pub mod models;
pub mod report;
pub mod rng;
pub mod sequential_private;
pub mod simulation;
pub mod sprt;

pub use accounting::{best_dp_report, compose_rdp, rdp_to_dp, DpReport, RdpCurve, StoppingMoment};
pub use bounds::{error_rate_bound, sample_size_bound, BoundResult, BoundSide, ErrorKind};
pub use error::{Error, Result};
pub use mechanisms::{gaussian_sigma, laplace_scale_for_abovethresh, perturb, privsprt_sigmas, NoiseMechanism};
pub use models::{
    drift_constants, kl_divergence, llr, sensitivity, truncated_llr, DriftConstants, Hypothesis, HypothesisPair,
    KlDirection, TruncationSpec,
};
pub use rng::{RngStream, TrialStreams};
pub use sequential_private::{run_privsprt, PrivTestConfig, TestMode};
pub use simulation::{ExperimentConfig, McEstimate};
pub use sprt::{run_sprt, Decision, SprtThresholds, TrialOutcome};
