//! Flat result rows and their CSV/JSON serialization.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Hypothesis;
use crate::sequential_private::TestMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Naive,
    Importance,
}

/// The quantity a row estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ExpectedT,
    Type1Error,
    Type2Error,
}

/// One estimate with the configuration it came from.
///
/// `eps_prime` is the per-test budget of the Gaussian calibration, or the
/// Laplace budget in Laplace mode; empty when noise is given explicitly or
/// absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub pair: String,
    pub mode: TestMode,
    #[serde(rename = "A")]
    pub a_trunc: f64,
    pub eps_prime: Option<f64>,
    pub delta: Option<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub a: f64,
    pub b: f64,
    pub hypothesis: Hypothesis,
    pub metric: Metric,
    pub estimator: Estimator,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub censored: u64,
}

pub fn write_csv<W: Write>(writer: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Numerical(format!("csv: {e}")))
}

pub fn read_csv(text: &str) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()
        .map_err(|e| Error::Numerical(format!("csv: {e}")))
}

pub fn json_string(rows: &[ResultRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Numerical(format!("json: {e}")))
}
