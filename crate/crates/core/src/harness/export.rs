use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::aggregate::SummaryRow;
use super::montecarlo::TrialRecord;
use crate::error::{IsacError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    #[default]
    Csv,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

pub const RECORD_COLUMNS: [&str; 11] = [
    "seed",
    "omega1",
    "p_max_dbm",
    "n_tx",
    "sum_rate",
    "mse_relaxed",
    "mse_extracted",
    "min_ci_margin",
    "tx_power",
    "iters",
    "status",
];

pub const SUMMARY_COLUMNS: [&str; 12] = [
    "omega1",
    "p_max_dbm",
    "n_tx",
    "count",
    "sum_rate_mean",
    "sum_rate_std",
    "mse_extracted_mean",
    "mse_extracted_std",
    "mse_relaxed_mean",
    "mse_relaxed_std",
    "iters_mean",
    "iters_std",
];

pub const BEAMPATTERN_COLUMNS: [&str; 2] = ["angle_deg", "gain"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| IsacError::Csv(e.into_error().into()))?.flush().map_err(|e| IsacError::io("<csv>", e))
}

/// One row per record with exactly [`RECORD_COLUMNS`]. Empty cells mark
/// values that could not be computed.
pub fn write_records_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv_writer(out, &RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.omega1.to_string(),
            r.p_max_dbm.to_string(),
            r.n_tx.to_string(),
            opt(r.sum_rate),
            opt(r.mse_relaxed),
            opt(r.mse_extracted),
            opt(r.min_ci_margin),
            opt(r.tx_power),
            r.iters.to_string(),
            r.status.as_str().to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv_writer(out, &SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            opt(r.omega1),
            opt(r.p_max_dbm),
            r.n_tx.map(|n| n.to_string()).unwrap_or_default(),
            r.count.to_string(),
            r.sum_rate.mean.to_string(),
            r.sum_rate.std.to_string(),
            r.mse_extracted.mean.to_string(),
            r.mse_extracted.std.to_string(),
            r.mse_relaxed.mean.to_string(),
            r.mse_relaxed.std.to_string(),
            r.iters.mean.to_string(),
            r.iters.std.to_string(),
        ])?;
    }
    finish(w)
}

/// Gain-versus-angle rows of one beampattern.
pub fn write_beampattern_csv<W: Write>(angles_deg: &[f64], gains: &[f64], out: W) -> Result<()> {
    if angles_deg.len() != gains.len() {
        return Err(IsacError::DimensionMismatch(format!(
            "{} angles for {} gains",
            angles_deg.len(),
            gains.len()
        )));
    }
    let mut w = csv_writer(out, &BEAMPATTERN_COLUMNS)?;
    for (a, g) in angles_deg.iter().zip(gains) {
        w.write_record([a.to_string(), g.to_string()])?;
    }
    finish(w)
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| IsacError::Json { path: "<output>".into(), source: e })?;
    out.write_all(b"\n").map_err(|e| IsacError::io("<output>", e))
}

pub fn read_records_json<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    serde_json::from_reader(input).map_err(|e| IsacError::Json { path: "<input>".into(), source: e })
}

/// Creates `path` and hands a buffered writer to `body`. Errors name the path.
pub fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| IsacError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| IsacError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| relabel(e, path))?;
    w.flush().map_err(|e| IsacError::io(path, e))
}

fn relabel(e: IsacError, path: &Path) -> IsacError {
    let p = path.display().to_string();
    match e {
        IsacError::Io { source, .. } => IsacError::Io { path: p, source },
        IsacError::Json { source, .. } => IsacError::Json { path: p, source },
        other => other,
    }
}

/// Writes `records` to `dir/stem.{csv,json}` and returns the path.
pub fn export_records(records: &[TrialRecord], dir: &Path, stem: &str, format: ExportFormat) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    write_file(&path, |w| match format {
        ExportFormat::Csv => write_records_csv(records, w),
        ExportFormat::Json => write_json(records, w),
    })?;
    Ok(path)
}

pub fn export_summary(rows: &[SummaryRow], dir: &Path, stem: &str, format: ExportFormat) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    write_file(&path, |w| match format {
        ExportFormat::Csv => write_summary_csv(rows, w),
        ExportFormat::Json => write_json(rows, w),
    })?;
    Ok(path)
}
