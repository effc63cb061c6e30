use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vanet_hardcore::curves::{OutageCurve, Provenance, SummaryCurve, SummaryKind};
use vanet_hardcore::fitting::{FitMethod, FitResult};
use vanet_hardcore::stats::Envelope;

use crate::error::CliError;
use crate::Format;

pub struct Context {
    pub out_dir: PathBuf,
    pub format: Format,
    pub seed: u64,
}

impl Context {
    fn extension(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    /// Writes `text` to `<out_dir>/<name>` and returns the path.
    pub fn write(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir).map_err(|source| CliError::Io {
            path: self.out_dir.clone(),
            source,
        })?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    pub fn write_outage(&self, stem: &str, curve: &OutageCurve) -> Result<PathBuf, CliError> {
        let text = match self.format {
            Format::Csv => curve.to_csv(),
            Format::Json => curve.to_json()?,
        };
        self.write(&format!("{stem}.{}", self.extension()), &text)
    }

    pub fn write_summary(&self, stem: &str, curve: &SummaryCurve) -> Result<PathBuf, CliError> {
        let text = match self.format {
            Format::Csv => curve.to_csv(),
            Format::Json => to_json(curve)?,
        };
        self.write(&format!("{stem}.{}", self.extension()), &text)
    }

    pub fn write_envelope(&self, stem: &str, envelope: &Envelope) -> Result<PathBuf, CliError> {
        let text = match self.format {
            Format::Csv => envelope.to_csv(),
            Format::Json => to_json(envelope)?,
        };
        self.write(&format!("{stem}.{}", self.extension()), &text)
    }

    pub fn write_fits(&self, fits: &[FitResult]) -> Result<PathBuf, CliError> {
        let text = match self.format {
            Format::Csv => fits_to_csv(fits)?,
            Format::Json => to_json(&fits)?,
        };
        self.write(&format!("fits.{}", self.extension()), &text)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Input(format!("cannot encode output: {e}")))
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One row of the fit table.
#[derive(Debug, Serialize, Deserialize)]
struct FitRow {
    lane_id: u32,
    method: FitMethod,
    lambda_hat: f64,
    c_hat: Option<f64>,
    mu_hat: f64,
    rss: Option<f64>,
    clamped: bool,
}

fn fits_to_csv(fits: &[FitResult]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for f in fits {
        w.serialize(FitRow {
            lane_id: f.lane_id,
            method: f.method,
            lambda_hat: f.lambda_hat,
            c_hat: f.c_hat,
            mu_hat: f.mu_hat(),
            rss: f.rss,
            clamped: f.clamped,
        })
        .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
}

/// Reads a fit table in either format; JSON is recognized by its first
/// non-blank character.
pub fn read_fits(path: &Path) -> Result<Vec<FitResult>, CliError> {
    let text = read(path)?;
    let bad = |e: &dyn std::fmt::Display| CliError::Input(format!("{}: {e}", path.display()));
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| bad(&e));
    }
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(text.as_bytes()).deserialize::<FitRow>() {
        let r = row.map_err(|e| bad(&e))?;
        rows.push(FitResult {
            lane_id: r.lane_id,
            method: r.method,
            lambda_hat: r.lambda_hat,
            c_hat: r.c_hat,
            rss: r.rss,
            clamped: r.clamped,
            c_raw: None,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no fits", path.display())));
    }
    Ok(rows)
}

/// A curve file of either kind, for distance comparisons.
pub enum AnyCurve {
    Outage(OutageCurve),
    Summary(SummaryCurve),
}

pub fn read_curve(path: &Path) -> Result<AnyCurve, CliError> {
    let text = read(path)?;
    let head = text.trim_start();
    let bad = |e: &dyn std::fmt::Display| CliError::Input(format!("{}: {e}", path.display()));
    if head.starts_with('{') {
        if let Ok(c) = OutageCurve::from_json(&text) {
            return Ok(AnyCurve::Outage(c));
        }
        return serde_json::from_str(&text)
            .map(AnyCurve::Summary)
            .map_err(|e| bad(&e));
    }
    if head.starts_with("theta_db") {
        OutageCurve::from_csv(&text, Provenance::MonteCarlo)
            .map(AnyCurve::Outage)
            .map_err(|e| bad(&e))
    } else {
        SummaryCurve::from_csv(&text, SummaryKind::G)
            .map(AnyCurve::Summary)
            .map_err(|e| bad(&e))
    }
}
