//! Result persistence. Every writer emits a data file (CSV or JSON) and a
//! JSON summary carrying the configuration hash and schema version.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

use super::{DelayScanResult, OutputFormat, PopulationReport, ScanResult, TrainPreview};

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    }
}

#[derive(Serialize)]
struct ScanCsvRow<'a> {
    series: &'a str,
    tau_fs: f64,
    magnitude: f64,
    signed_value: f64,
    phase: f64,
    norm_ok: bool,
    converged: bool,
    error: &'a str,
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    observable: &'a str,
    schema_version: u32,
    tool_version: &'a str,
    config_hash: &'a str,
    nu_thz: f64,
    phi_ref: f64,
    series: Vec<&'a str>,
    rows: usize,
    failed_rows: usize,
    continuity_outliers: &'a [f64],
    timestamp_unix_s: Option<u64>,
}

/// Writes `<observable>_scan.{csv,json}` and `<observable>_summary.json`.
pub fn write_scan(dir: &Path, result: &ScanResult, format: OutputFormat) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let obs = result.observable.as_str();
    let data = match format {
        OutputFormat::Csv => {
            let p = dir.join(format!("{obs}_scan.csv"));
            let rows = result.series.iter().flat_map(|s| {
                s.rows.iter().map(move |r| ScanCsvRow {
                    series: &s.name,
                    tau_fs: r.tau_fs,
                    magnitude: r.magnitude,
                    signed_value: r.signed_value,
                    phase: r.phase,
                    norm_ok: r.norm_ok,
                    converged: r.converged,
                    error: r.error.as_deref().unwrap_or(""),
                })
            });
            write_csv(&p, rows)?;
            p
        }
        OutputFormat::Json => {
            let p = dir.join(format!("{obs}_scan.json"));
            write_json(&p, result)?;
            p
        }
    };
    let summary = ScanSummary {
        observable: obs,
        schema_version: result.schema_version,
        tool_version: &result.tool_version,
        config_hash: &result.config_hash,
        nu_thz: result.nu_thz,
        phi_ref: result.phi_ref,
        series: result.series.iter().map(|s| s.name.as_str()).collect(),
        rows: result.series.first().map_or(0, |s| s.rows.len()),
        failed_rows: result.failed_rows(),
        continuity_outliers: &result.continuity_outliers,
        timestamp_unix_s: result.timestamp_unix_s,
    };
    let s = dir.join(format!("{obs}_summary.json"));
    write_json(&s, &summary)?;
    Ok(vec![data, s])
}

#[derive(Serialize)]
struct TraceRow {
    dt_fs: f64,
    i_plus: f64,
    i_minus: f64,
    dichroism: f64,
}

/// Writes `trace.{csv,json}` and `summary.json`.
pub fn write_trace(dir: &Path, result: &DelayScanResult, format: OutputFormat) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let t = &result.trace;
    let rows = (0..t.delays_fs.len()).map(|k| TraceRow {
        dt_fs: t.delays_fs[k],
        i_plus: t.i_plus[k],
        i_minus: t.i_minus[k],
        dichroism: t.dichroism[k],
    });
    let data = match format {
        OutputFormat::Csv => {
            let p = dir.join("trace.csv");
            write_csv(&p, rows)?;
            p
        }
        OutputFormat::Json => {
            let p = dir.join("trace.json");
            write_json(&p, &rows.collect::<Vec<_>>())?;
            p
        }
    };
    let s = dir.join("summary.json");
    write_json(&s, &result.summary)?;
    Ok(vec![data, s])
}

#[derive(Serialize)]
struct PopulationRow<'a> {
    tau_fs: f64,
    scenario: &'a str,
    j: u32,
    m: i32,
    population: f64,
}

/// Writes `populations.{csv,json}` and `populations_summary.json`.
pub fn write_populations(dir: &Path, report: &PopulationReport, format: OutputFormat) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let data = match format {
        OutputFormat::Csv => {
            let p = dir.join("populations.csv");
            let rows = report.tables.iter().flat_map(|t| {
                t.entries.iter().map(move |e| PopulationRow {
                    tau_fs: t.tau_fs,
                    scenario: &t.scenario,
                    j: e.j,
                    m: e.m,
                    population: e.population,
                })
            });
            write_csv(&p, rows)?;
            p
        }
        OutputFormat::Json => {
            let p = dir.join("populations.json");
            write_json(&p, report)?;
            p
        }
    };
    #[derive(Serialize)]
    struct Summary<'a> {
        config_hash: &'a str,
        schema_version: u32,
        tool_version: &'a str,
        tables: Vec<(f64, &'a str, f64)>,
        timestamp_unix_s: Option<u64>,
    }
    let s = dir.join("populations_summary.json");
    write_json(
        &s,
        &Summary {
            config_hash: &report.config_hash,
            schema_version: report.schema_version,
            tool_version: &report.tool_version,
            tables: report
                .tables
                .iter()
                .map(|t| (t.tau_fs, t.scenario.as_str(), t.total))
                .collect(),
            timestamp_unix_s: report.timestamp_unix_s,
        },
    )?;
    Ok(vec![data, s])
}

#[derive(Serialize)]
struct PreviewRow {
    t_fs: f64,
    intensity: f64,
    angle_deg: f64,
}

/// Writes `train.{csv,json}` (t_fs, intensity, angle_deg) and
/// `descriptor.json`.
pub fn write_preview(dir: &Path, preview: &TrainPreview, format: OutputFormat) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let rows = preview.samples.iter().map(|&(t_fs, intensity, angle_deg)| PreviewRow {
        t_fs,
        intensity,
        angle_deg,
    });
    let data = match format {
        OutputFormat::Csv => {
            let p = dir.join("train.csv");
            write_csv(&p, rows)?;
            p
        }
        OutputFormat::Json => {
            let p = dir.join("train.json");
            write_json(&p, &rows.collect::<Vec<_>>())?;
            p
        }
    };
    let d = dir.join("descriptor.json");
    write_json(&d, preview)?;
    Ok(vec![data, d])
}
