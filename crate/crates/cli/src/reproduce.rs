//! Reproduction recipes for the published tables and figures.
//!
//! Reference values live in `data/reference_values.json`; nothing here
//! hard-codes them.

use std::collections::BTreeMap;
use std::path::Path;

use clap::ValueEnum;
use privsprt_core::report::{csv_string, ResultRow};
use privsprt_core::simulation::{
    experiment_rows, matched_error_ordering, oc_asn_sweep, run_experiment, sweep_rows, ExperimentResult, NoiseSource,
    SweepPoint,
};
use privsprt_core::{ExperimentConfig, Hypothesis, HypothesisPair, McEstimate, SprtThresholds, TruncationSpec};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::commands::OutputDir;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

const REFERENCE_JSON: &str = include_str!("../data/reference_values.json");
/// Trials at scale 1.
pub const FULL_SCALE_TRIALS: u64 = 100_000;
/// Truncation placeholder for noiseless rows, which ignore it.
const NOISELESS_TRUNCATION: f64 = 1.0;
/// Matched-error levels compared per figure panel.
pub const ORDERING_LEVELS: usize = 20;

#[derive(Clone, Debug, Deserialize)]
pub struct ReferenceData {
    pub version: String,
    pub note: String,
    pub tables: BTreeMap<String, TableSpec>,
    pub figures: BTreeMap<String, FigureSpec>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct TableSpec {
    pub citation: String,
    pub rows: Vec<RowSpec>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct RowSpec {
    pub label: String,
    pub pair: HypothesisPair,
    #[serde(default)]
    pub truncation: Option<f64>,
    pub noise: NoiseSource,
    pub a: f64,
    pub b: f64,
    /// Quantity name to published value: `e0`, `e1`, `expected_t`, `type1`, `type2`.
    pub reference: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct FigureSpec {
    pub citation: String,
    pub settings: Vec<FigureSetting>,
    pub truncation: f64,
    pub epsilon_primes: Vec<f64>,
    pub delta: f64,
    /// Thresholds `a = b = A * m` of the sweep.
    pub grid_multipliers: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct FigureSetting {
    pub label: String,
    pub pair: HypothesisPair,
}

pub fn reference_data() -> ReferenceData {
    serde_json::from_str(REFERENCE_JSON).expect("embedded reference data parses")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Table1,
    Table2,
    Table3,
    Fig1,
    Fig2,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Table2 => "table2",
            Target::Table3 => "table3",
            Target::Fig1 => "fig1",
            Target::Fig2 => "fig2",
        }
    }
}

/// Published value next to its reproduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub target: String,
    pub label: String,
    pub quantity: String,
    pub reference: Option<f64>,
    pub reproduced: f64,
    /// `(reproduced - reference) / reference`.
    pub rel_deviation: Option<f64>,
    pub stderr: f64,
    pub n: u64,
    pub censored: u64,
}

pub fn trials_for_scale(scale: f64) -> CliResult<u64> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(CliError::field("scale", format!("must lie in (0, 1], got {scale}")));
    }
    Ok(((scale * FULL_SCALE_TRIALS as f64).round() as u64).max(1))
}

/// `E[T]` pooled over both hypotheses, for symmetric settings.
fn pooled(a: &McEstimate, b: &McEstimate) -> McEstimate {
    McEstimate {
        mean: 0.5 * (a.mean + b.mean),
        std_error: 0.5 * a.std_error.hypot(b.std_error),
        n_trials: a.n_trials + b.n_trials,
        estimator: a.estimator,
        censored: a.censored + b.censored,
    }
}

fn quantity(r: &ExperimentResult, name: &str) -> Option<McEstimate> {
    match name {
        "e0" => Some(r.h0.expected_t),
        "e1" => Some(r.h1.expected_t),
        "expected_t" => Some(pooled(&r.h0.expected_t, &r.h1.expected_t)),
        "type1" => Some(r.type1_importance()),
        "type2" => Some(r.type2_importance()),
        _ => None,
    }
}

pub fn row_experiment(row: &RowSpec, n_trials: u64, seed: u64) -> CliResult<ExperimentConfig> {
    let trunc = TruncationSpec::new(row.truncation.unwrap_or(NOISELESS_TRUNCATION))?;
    Ok(ExperimentConfig::new(
        row.pair.clone(),
        SprtThresholds::new(row.a, row.b)?,
        trunc,
        row.noise,
        None,
        n_trials,
        seed,
    )?)
}

pub fn comparison(target: &str, label: &str, name: &str, reference: Option<f64>, est: &McEstimate) -> ComparisonRow {
    ComparisonRow {
        target: target.to_string(),
        label: label.to_string(),
        quantity: name.to_string(),
        reference,
        reproduced: est.mean,
        rel_deviation: reference.map(|r| (est.mean - r) / r),
        stderr: est.std_error,
        n: est.n_trials,
        censored: est.censored,
    }
}

pub fn reproduce_table(
    target: &str,
    spec: &TableSpec,
    n_trials: u64,
    seed: u64,
) -> CliResult<(Vec<ResultRow>, Vec<ComparisonRow>)> {
    let mut rows = Vec::new();
    let mut cmp = Vec::new();
    for row in &spec.rows {
        let cfg = row_experiment(row, n_trials, seed)?;
        let r = run_experiment(&cfg)?;
        rows.extend(experiment_rows(&cfg, &r));
        for (name, &reference) in &row.reference {
            let est = quantity(&r, name)
                .ok_or_else(|| CliError::Core(privsprt_core::Error::Unsupported(format!("unknown quantity `{name}`"))))?;
            cmp.push(comparison(target, &row.label, name, Some(reference), &est));
        }
    }
    Ok((rows, cmp))
}

/// One curve point of a figure sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub setting: String,
    pub eps_prime: f64,
    pub a: f64,
    pub b: f64,
    pub error: f64,
    pub expected_t: f64,
}

pub struct FigureOutput {
    pub rows: Vec<ResultRow>,
    pub curves: Vec<CurveRow>,
    pub comparisons: Vec<ComparisonRow>,
}

pub fn reproduce_figure(target: &str, spec: &FigureSpec, n_trials: u64, seed: u64) -> CliResult<FigureOutput> {
    let trunc = TruncationSpec::new(spec.truncation)?;
    let grid = spec
        .grid_multipliers
        .iter()
        .map(|m| SprtThresholds::symmetric(m * spec.truncation))
        .collect::<privsprt_core::error::Result<Vec<_>>>()?;
    let mut out = FigureOutput {
        rows: Vec::new(),
        curves: Vec::new(),
        comparisons: Vec::new(),
    };
    for setting in &spec.settings {
        let mut curves = Vec::new();
        for &eps in &spec.epsilon_primes {
            let noise = NoiseSource::Gaussian {
                epsilon_prime: eps,
                delta: spec.delta,
            };
            let cfg = ExperimentConfig::new(setting.pair.clone(), grid[0], trunc, noise, None, n_trials, seed)?;
            // One cap for the whole sweep, taken at the largest threshold.
            let t_max = privsprt_core::sprt::default_t_max(grid[grid.len() - 1], &setting.pair);
            let template = privsprt_core::PrivTestConfig { t_max, ..cfg.test };
            let points: Vec<SweepPoint> =
                oc_asn_sweep(&setting.pair, &template, &grid, &[Hypothesis::H0, Hypothesis::H1], n_trials, seed)?;
            let cfg = ExperimentConfig { test: template, ..cfg };
            out.rows.extend(sweep_rows(&cfg, &points));
            let curve: Vec<(f64, f64)> = points.iter().filter_map(SweepPoint::curve_point).collect();
            for (p, (err, et)) in points.iter().filter_map(|p| p.curve_point().map(|c| (p, c))) {
                out.curves.push(CurveRow {
                    setting: setting.label.clone(),
                    eps_prime: eps,
                    a: p.thresholds.a,
                    b: p.thresholds.b,
                    error: err,
                    expected_t: et,
                });
            }
            curves.push((eps, curve));
        }
        // Strongest privacy first: E[T] should fall along the list.
        curves.sort_by(|x, y| x.0.total_cmp(&y.0));
        let only: Vec<Vec<(f64, f64)>> = curves.into_iter().map(|c| c.1).collect();
        let fraction = matched_error_ordering(&only, ORDERING_LEVELS).map_or(0.0, |c| c.fraction_ordered);
        let est = McEstimate {
            mean: fraction,
            std_error: 0.0,
            n_trials,
            estimator: privsprt_core::report::Estimator::Naive,
            censored: 0,
        };
        out.comparisons
            .push(comparison(target, &setting.label, "ordered_fraction", None, &est));
    }
    Ok(out)
}

fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let numerical = |e: String| CliError::Core(privsprt_core::Error::Numerical(format!("csv: {e}")));
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| numerical(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Human-readable comparison table.
pub fn format_comparison(rows: &[ComparisonRow]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4e}"));
    let mut s = format!(
        "{:<36} {:<16} {:>11} {:>11} {:>9} {:>10}\n",
        "row", "quantity", "reference", "reproduced", "rel.dev", "stderr"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<36} {:<16} {:>11} {:>11.4e} {:>9} {:>10.3e}\n",
            r.label,
            r.quantity,
            fmt(r.reference),
            r.reproduced,
            r.rel_deviation.map_or_else(|| "-".to_string(), |d| format!("{:+.3}", d)),
            r.stderr
        ));
    }
    s
}

pub fn cmd_reproduce(target: Target, scale: f64, seed: u64, out_dir: &Path) -> CliResult<(RunManifest, Vec<ComparisonRow>)> {
    let n_trials = trials_for_scale(scale)?;
    let data = reference_data();
    let name = target.name();
    let mut out = OutputDir::create(out_dir)?;
    let comparisons = match target {
        Target::Table1 | Target::Table2 | Target::Table3 => {
            let spec = &data.tables[name];
            let (rows, cmp) = reproduce_table(name, spec, n_trials, seed)?;
            out.write(&format!("{name}_results.csv"), &csv_string(&rows)?)?;
            cmp
        }
        Target::Fig1 | Target::Fig2 => {
            let spec = &data.figures[name];
            let fig = reproduce_figure(name, spec, n_trials, seed)?;
            out.write(&format!("{name}_results.csv"), &csv_string(&fig.rows)?)?;
            out.write(&format!("{name}_curves.csv"), &to_csv(&fig.curves)?)?;
            fig.comparisons
        }
    };
    out.write(&format!("{name}_comparison.csv"), &to_csv(&comparisons)?)?;
    out.write_json(&format!("{name}_comparison.json"), &comparisons)?;
    let config = json!({
        "target": name,
        "scale": scale,
        "seed": seed,
        "n_trials": n_trials,
        "reference_version": data.version,
    });
    let manifest = out.finish(RunManifest::new(format!("reproduce {name}"), config, seed))?;
    Ok((manifest, comparisons))
}
