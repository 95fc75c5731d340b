use thiserror::Error;

use crate::simulation::CalibrationState;

/// Errors raised by the models, mechanisms and experiment engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A computation left the domain where it is defined (e.g. an observation
    /// outside the joint support of both densities).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation needs something the hypothesis pair does not provide.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical routine produced no finite answer.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Threshold calibration ran out of probes; carries the best state found.
    #[error("calibration failed: {reason} (best a = {}, b = {}, type1 = {}, type2 = {})", best.a, best.b, best.type1, best.type2)]
    Calibration { reason: String, best: Box<CalibrationState> },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
