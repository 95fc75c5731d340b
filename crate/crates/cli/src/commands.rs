//! `run`, `privacy-report` and `bounds`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use privsprt_core::bounds::bounds_report;
use privsprt_core::report::{csv_string, json_string};
use privsprt_core::simulation::{experiment_rows, run_experiment, ExperimentResult};
use privsprt_core::{best_dp_report, McEstimate, TestMode};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{RunManifest, MANIFEST_FILE};

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const CALIBRATION_JSON: &str = "calibration.json";
pub const PRIVACY_JSON: &str = "privacy_report.json";
pub const BOUNDS_JSON: &str = "bounds.json";

/// Collects output files and finishes with a manifest.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
    started: Instant,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        self.write(name, &to_pretty(value))
    }

    pub fn finish(self, mut manifest: RunManifest) -> CliResult<RunManifest> {
        manifest.wall_time_seconds = self.started.elapsed().as_secs_f64();
        manifest.outputs = self.written;
        manifest.outputs.push(self.dir.join(MANIFEST_FILE));
        manifest.write(&self.dir)?;
        Ok(manifest)
    }
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn config_value(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// Execute the experiment and write CSV, JSON and manifest.
pub fn cmd_run(cfg: &RunConfig, out_dir: &Path) -> CliResult<RunManifest> {
    let mut out = OutputDir::create(out_dir)?;
    let resolved = cfg.resolve()?;
    let result = run_experiment(&resolved.experiment)?;
    let rows = experiment_rows(&resolved.experiment, &result);
    out.write(RESULTS_CSV, &csv_string(&rows)?)?;
    out.write(RESULTS_JSON, &json_string(&rows)?)?;
    if let Some(c) = &resolved.calibration {
        out.write_json(CALIBRATION_JSON, c)?;
    }
    out.finish(RunManifest::new("run", config_value(cfg), cfg.seed))
}

/// Privacy guarantee of a configuration.
pub fn privacy_report(cfg: &RunConfig) -> CliResult<Value> {
    let resolved = cfg.resolve()?;
    let test = resolved.experiment.test;
    if !test.is_private() {
        return Ok(json!({
            "private": false,
            "mode": test.mode,
            "note": "non-private: no noise is added, so no differential privacy guarantee holds",
        }));
    }
    match test.mode {
        TestMode::LaplaceAboveThresh => {
            let epsilon = match cfg.noise {
                privsprt_core::simulation::NoiseSource::Laplace { epsilon } => epsilon,
                _ => unreachable!("laplace mode comes from laplace noise"),
            };
            Ok(json!({
                "private": true,
                "mode": test.mode,
                "epsilon": epsilon,
                "delta": 0.0,
                "note": "pure DP: each above-threshold branch spends epsilon / 2",
            }))
        }
        _ => {
            let report = best_dp_report(&resolved.experiment.pair, &test, cfg.report_delta())?;
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["private"] = json!(true);
            v["mode"] = json!(test.mode);
            Ok(v)
        }
    }
}

pub fn cmd_privacy_report(cfg: &RunConfig, out_dir: &Path) -> CliResult<(RunManifest, Value)> {
    let mut out = OutputDir::create(out_dir)?;
    let report = privacy_report(cfg)?;
    out.write_json(PRIVACY_JSON, &report)?;
    let manifest = out.finish(RunManifest::new("privacy-report", config_value(cfg), cfg.seed))?;
    Ok((manifest, report))
}

/// Bound values next to the empirical estimates they should dominate.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsComparison {
    pub bounds: privsprt_core::bounds::BoundsReport,
    pub empirical: EmpiricalSummary,
    /// `bound >= empirical mean - 3 SE` per quantity.
    pub dominates: Dominance,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalSummary {
    pub e0: McEstimate,
    pub e1: McEstimate,
    pub type1: McEstimate,
    pub type2: McEstimate,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Dominance {
    pub e0: bool,
    pub e1: bool,
    pub type1: bool,
    pub type2: bool,
}

fn dominates(bound: f64, est: &McEstimate) -> bool {
    bound >= est.mean - 3.0 * est.std_error
}

pub fn bounds_comparison(cfg: &RunConfig) -> CliResult<BoundsComparison> {
    if cfg.truncation.is_none() {
        return Err(CliError::field("truncation", "the bounds need a truncation level"));
    }
    let resolved = cfg.resolve()?;
    let test = resolved.experiment.test;
    if test.mode == TestMode::LaplaceAboveThresh {
        return Err(CliError::Core(privsprt_core::Error::Unsupported(
            "the bounds assume Gaussian or no noise".into(),
        )));
    }
    let bounds = bounds_report(&resolved.experiment.pair, test.thresholds, test.trunc, test.sigma1, test.sigma2)?;
    let r: ExperimentResult = run_experiment(&resolved.experiment)?;
    let empirical = EmpiricalSummary {
        e0: r.h0.expected_t,
        e1: r.h1.expected_t,
        type1: r.type1_importance(),
        type2: r.type2_importance(),
    };
    let dominates = Dominance {
        e0: dominates(bounds.e0.value, &empirical.e0),
        e1: dominates(bounds.e1.value, &empirical.e1),
        type1: dominates(bounds.type1.value, &empirical.type1),
        type2: dominates(bounds.type2.value, &empirical.type2),
    };
    Ok(BoundsComparison {
        bounds,
        empirical,
        dominates,
    })
}

pub fn cmd_bounds(cfg: &RunConfig, out_dir: &Path) -> CliResult<(RunManifest, BoundsComparison)> {
    let mut out = OutputDir::create(out_dir)?;
    let report = bounds_comparison(cfg)?;
    out.write_json(BOUNDS_JSON, &report)?;
    let manifest = out.finish(RunManifest::new("bounds", config_value(cfg), cfg.seed))?;
    Ok((manifest, report))
}
