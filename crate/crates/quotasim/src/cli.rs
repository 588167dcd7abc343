//! Config-file driven command execution behind the `quotasim` binary.
//!
//! One JSON document describes one run; its `command` field selects among
//! `simulate`, `sweep`, `quality-sweep`, `boundary`, and `dataset`. Unknown
//! fields are rejected and every numeric parameter is validated before any
//! work starts. Reports are written atomically (write to a temp file, then
//! rename), so a failed run never leaves a partial file behind.
//!
//! `QUOTASIM_THREADS` caps the worker pool; it affects scheduling only,
//! never results.

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    paradox_boundary, quality_sweep, run_single_experiment, sweep, write_quality_csv,
    write_sweep_csv, AxisRange, ExperimentResult, QualitySweepSpec, SweepAxis, SweepSpec,
};
use crate::datasets::{analyze_dataset, load_spec, DatasetReport};
use crate::error::{Error, Result};
use crate::metrics::RepresentationReport;
use crate::population::{BiasParams, PopulationConfig, Subgroup};

/// Command-line flags; everything else lives in the config document.
#[derive(Debug, Parser)]
#[command(
    name = "quotasim",
    about = "Quota-based debiasing experiments from JSON config files"
)]
pub struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Report destination; overrides the config's `output`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report format; overrides the config's `format`.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Replaces the config's seed / master seed.
    #[arg(long)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    #[allow(dead_code)]
    command: String,
    n: u64,
    f: f64,
    d_color: f64,
    d_shape: f64,
    seed: u64,
    k: f64,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    #[allow(dead_code)]
    command: String,
    #[serde(default)]
    axes: Vec<SweepAxis>,
    #[serde(default)]
    d_color: Option<f64>,
    #[serde(default)]
    d_shape: Option<f64>,
    #[serde(default)]
    f: Option<f64>,
    k: f64,
    n: u64,
    reps: u32,
    master_seed: u64,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QualitySweepConfig {
    #[allow(dead_code)]
    command: String,
    f: f64,
    k: f64,
    d_color: AxisRange,
    d_shape_values: Vec<f64>,
    n: u64,
    reps: u32,
    master_seed: u64,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryConfig {
    #[allow(dead_code)]
    command: String,
    d_color: f64,
    f: f64,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetConfig {
    #[allow(dead_code)]
    command: String,
    spec: PathBuf,
    #[serde(default)]
    k: Option<f64>,
    #[serde(default)]
    reps: Option<u32>,
    #[serde(default)]
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
}

/// Parses `QUOTASIM_THREADS` and runs `body` inside a pool of that size;
/// with the variable unset the default pool is used.
fn with_thread_pool<T>(body: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match std::env::var("QUOTASIM_THREADS") {
        Err(_) => body(),
        Ok(raw) => {
            let threads: usize = raw.parse().map_err(|_| {
                Error::InvalidConfig(format!(
                    "QUOTASIM_THREADS must be a positive integer, got {raw:?}"
                ))
            })?;
            if threads == 0 {
                return Err(Error::InvalidConfig(
                    "QUOTASIM_THREADS must be a positive integer, got 0".into(),
                ));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(body)
        }
    }
}

/// Serialized JSON document for a simulate run.
#[derive(Debug, Serialize)]
struct SimulateReportDoc<'a> {
    config: &'a PopulationConfig,
    k: f64,
    result: &'a ExperimentResult,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("invalid output path {path:?}")))?
        .to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let write_result = std::fs::write(&tmp, bytes);
    if write_result.is_err() {
        let _ = std::fs::remove_file(&tmp);
        write_result?;
    }
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

fn emit(bytes: Vec<u8>, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => write_atomic(path, &bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            use std::io::Write;
            stdout.write_all(&bytes)?;
            Ok(())
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Per-group CSV rows for a simulate report: one row per (rule, subgroup).
fn simulate_csv(config: &PopulationConfig, k: f64, result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "rule",
        "group",
        "group_size",
        "selected_count",
        "selection_rate",
        "representation_bias",
        "m",
        "n_total",
        "k_effective",
        "f_k",
        "k",
        "n",
        "f",
        "d_color",
        "d_shape",
        "seed",
    ])?;
    let sides: [(&str, &RepresentationReport, f64); 2] = [
        ("blind", &result.blind, result.blind_fairness.f_k),
        ("quota_color", &result.quota_color, result.quota_fairness.f_k),
    ];
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (rule, report, f_k) in sides {
        for (subgroup, stats) in report.groups() {
            w.write_record([
                rule.to_string(),
                subgroup.key().to_string(),
                stats.group_size.to_string(),
                stats.selected_count.to_string(),
                opt(stats.selection_rate),
                opt(stats.representation_bias),
                report.m.to_string(),
                report.n_total.to_string(),
                report.k_effective.to_string(),
                f_k.to_string(),
                k.to_string(),
                config.n.to_string(),
                config.f.to_string(),
                config.bias.d_color.to_string(),
                config.bias.d_shape.to_string(),
                config.seed.to_string(),
            ])?;
        }
    }
    Ok(w.into_inner().expect("csv into_inner"))
}

/// Per-group CSV rows for a dataset report, with run-level scalars repeated
/// on every row.
fn dataset_csv(report: &DatasetReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "group",
        "group_size",
        "blind_selected",
        "blind_rate",
        "blind_bias",
        "quota_selected",
        "quota_rate",
        "quota_bias",
        "delta_b",
        "approx_delta_b_mean",
        "approx_delta_b_se",
        "n_rows",
        "n_dropped",
        "k",
        "higher_is_worse",
        "correlation_r",
        "correlation_p",
        "fit_mu",
        "fit_sigma",
        "fit_d_visible",
        "fit_d_hidden",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for subgroup in Subgroup::ALL {
        let blind = report.blind.group(subgroup);
        let quota = report.quota_visible.group(subgroup);
        w.write_record([
            subgroup.key().to_string(),
            blind.group_size.to_string(),
            blind.selected_count.to_string(),
            opt(blind.selection_rate),
            opt(blind.representation_bias),
            quota.selected_count.to_string(),
            opt(quota.selection_rate),
            opt(quota.representation_bias),
            opt(report.delta_b(subgroup)),
            opt(report.approximation.delta_b_mean(subgroup)),
            opt(report.approximation.delta_b_se(subgroup)),
            report.n_rows.to_string(),
            report.n_dropped.to_string(),
            report.k.to_string(),
            report.higher_is_worse.to_string(),
            report.correlation_r.to_string(),
            report.correlation_p.to_string(),
            report.fit.mu.to_string(),
            report.fit.sigma.to_string(),
            report.fit.d_visible.to_string(),
            report.fit.d_hidden.to_string(),
        ])?;
    }
    Ok(w.into_inner().expect("csv into_inner"))
}

fn peek_command(doc: &serde_json::Value) -> Result<String> {
    doc.get("command")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| Error::InvalidConfig("config needs a string `command` field".into()))
}

/// Runs the command described by `cli`. Exit behavior for the binary: any
/// error maps to a nonzero status with the message on stderr.
pub fn run(cli: &Cli) -> Result<()> {
    let text = std::fs::read_to_string(&cli.config)?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let command = peek_command(&doc)?;

    match command.as_str() {
        "simulate" => {
            let mut cfg: SimulateConfig = serde_json::from_value(doc)?;
            if let Some(seed) = cli.seed_override {
                cfg.seed = seed;
            }
            let config = PopulationConfig::new(
                cfg.n,
                cfg.f,
                BiasParams::new(cfg.d_color, cfg.d_shape),
                cfg.seed,
            );
            config.validate()?;
            crate::selection::slot_count(cfg.k, config.total() as usize)?;
            let result = with_thread_pool(|| run_single_experiment(&config, cfg.k))?;
            let output = cli.output.as_deref().or(cfg.output.as_deref());
            let bytes = match cli.format.or(cfg.format).unwrap_or(OutputFormat::Json) {
                OutputFormat::Json => json_bytes(&SimulateReportDoc {
                    config: &config,
                    k: cfg.k,
                    result: &result,
                })?,
                OutputFormat::Csv => simulate_csv(&config, cfg.k, &result)?,
            };
            emit(bytes, output)
        }
        "sweep" => {
            let mut cfg: SweepConfig = serde_json::from_value(doc)?;
            if let Some(seed) = cli.seed_override {
                cfg.master_seed = seed;
            }
            let spec = SweepSpec {
                axes: cfg.axes,
                d_color: cfg.d_color,
                d_shape: cfg.d_shape,
                f: cfg.f,
                k: cfg.k,
                n: cfg.n,
                reps: cfg.reps,
                master_seed: cfg.master_seed,
            };
            spec.validate()?;
            let results = with_thread_pool(|| sweep(&spec))?;
            let output = cli.output.as_deref().or(cfg.output.as_deref());
            let bytes = match cli.format.or(cfg.format).unwrap_or(OutputFormat::Csv) {
                OutputFormat::Json => json_bytes(&results)?,
                OutputFormat::Csv => {
                    let mut buffer = Vec::new();
                    write_sweep_csv(&results, &mut buffer)?;
                    buffer
                }
            };
            emit(bytes, output)
        }
        "quality-sweep" => {
            let mut cfg: QualitySweepConfig = serde_json::from_value(doc)?;
            if let Some(seed) = cli.seed_override {
                cfg.master_seed = seed;
            }
            let spec = QualitySweepSpec {
                f: cfg.f,
                k: cfg.k,
                d_color: cfg.d_color,
                d_shape_values: cfg.d_shape_values,
                n: cfg.n,
                reps: cfg.reps,
                master_seed: cfg.master_seed,
            };
            spec.validate()?;
            let results = with_thread_pool(|| quality_sweep(&spec))?;
            let output = cli.output.as_deref().or(cfg.output.as_deref());
            let bytes = match cli.format.or(cfg.format).unwrap_or(OutputFormat::Csv) {
                OutputFormat::Json => json_bytes(&results)?,
                OutputFormat::Csv => {
                    let mut buffer = Vec::new();
                    write_quality_csv(&results, &mut buffer)?;
                    buffer
                }
            };
            emit(bytes, output)
        }
        "boundary" => {
            let cfg: BoundaryConfig = serde_json::from_value(doc)?;
            let threshold = paradox_boundary(cfg.d_color, cfg.f)?;
            println!("{threshold}");
            if let Some(output) = cli.output.as_deref().or(cfg.output.as_deref()) {
                let bytes = match cli.format.or(cfg.format).unwrap_or(OutputFormat::Json) {
                    OutputFormat::Json => json_bytes(&serde_json::json!({
                        "d_color": cfg.d_color,
                        "f": cfg.f,
                        "d_shape_threshold": threshold,
                    }))?,
                    OutputFormat::Csv => {
                        let mut w = csv::Writer::from_writer(Vec::new());
                        w.write_record(["d_color", "f", "d_shape_threshold"])?;
                        w.write_record([
                            cfg.d_color.to_string(),
                            cfg.f.to_string(),
                            threshold.to_string(),
                        ])?;
                        w.into_inner().expect("csv into_inner")
                    }
                };
                write_atomic(output, &bytes)?;
            }
            Ok(())
        }
        "dataset" => {
            let cfg: DatasetConfig = serde_json::from_value(doc)?;
            let spec_path = if cfg.spec.is_relative() {
                cli.config
                    .parent()
                    .map(|p| p.join(&cfg.spec))
                    .unwrap_or_else(|| cfg.spec.clone())
            } else {
                cfg.spec.clone()
            };
            let spec = load_spec(&spec_path)?;
            let reps = cfg.reps.unwrap_or(100);
            let seed = cli.seed_override.or(cfg.seed).unwrap_or(0);
            let report = with_thread_pool(|| analyze_dataset(&spec, cfg.k, reps, seed))?;
            let output = cli.output.as_deref().or(cfg.output.as_deref());
            let bytes = match cli.format.or(cfg.format).unwrap_or(OutputFormat::Json) {
                OutputFormat::Json => json_bytes(&report)?,
                OutputFormat::Csv => dataset_csv(&report)?,
            };
            emit(bytes, output)
        }
        other => Err(Error::InvalidConfig(format!(
            "unknown command {other:?}; expected simulate, sweep, quality-sweep, boundary, or dataset"
        ))),
    }
}
