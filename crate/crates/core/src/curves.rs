//! Tabulated curves and their on-disk formats.
//!
//! Summary curves are written as `r,value`; envelopes as `r,lower,upper`;
//! outage curves as `theta_db,p_out`. Undefined values (a Ĵ estimate where
//! the contact distribution has run out of mass) are written as empty
//! fields and read back as NaN.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("grid and values differ in length ({grid} vs {values})")]
    LengthMismatch { grid: usize, values: usize },
    #[error("grid must be strictly increasing and finite")]
    BadGrid,
    #[error("curve has no points")]
    Empty,
    #[error("unexpected CSV header {found:?}, expected {expected:?}")]
    Header { found: String, expected: String },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("probability {value} at index {index} outside [0, 1]")]
    Probability { index: usize, value: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SummaryKind {
    J,
    K,
    L,
    G,
    F,
    #[serde(rename = "PCF")]
    Pcf,
}

impl SummaryKind {
    pub fn label(self) -> &'static str {
        match self {
            SummaryKind::J => "J",
            SummaryKind::K => "K",
            SummaryKind::L => "L",
            SummaryKind::G => "G",
            SummaryKind::F => "F",
            SummaryKind::Pcf => "PCF",
        }
    }
}

/// Values of one summary statistic on a distance grid (meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCurve {
    r_grid: Vec<f64>,
    values: Vec<f64>,
    kind: SummaryKind,
}

impl SummaryCurve {
    pub fn new(kind: SummaryKind, r_grid: Vec<f64>, values: Vec<f64>) -> Result<Self, CurveError> {
        check_grid(&r_grid, values.len())?;
        if r_grid[0] < 0.0 {
            return Err(CurveError::BadGrid);
        }
        Ok(Self {
            r_grid,
            values,
            kind,
        })
    }

    pub fn kind(&self) -> SummaryKind {
        self.kind
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.r_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_grid.is_empty()
    }

    /// Value at the grid point closest to `r`.
    pub fn value_at(&self, r: f64) -> Option<f64> {
        let idx = nearest_index(&self.r_grid, r)?;
        Some(self.values[idx])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in self.r_grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", r, fmt_value(*v));
        }
        out
    }

    pub fn from_csv(text: &str, kind: SummaryKind) -> Result<Self, CurveError> {
        let (grid, cols) = read_columns(text, &["r", "value"])?;
        Self::new(kind, grid, cols.into_iter().next().unwrap_or_default())
    }
}

/// Where an outage curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    HcAnalytic,
    PppAnalytic,
    MonteCarlo,
}

/// Outage probability over a grid of SIR thresholds (linear scale).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageCurve {
    theta_grid: Vec<f64>,
    p_out: Vec<f64>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct OutageCurveJson {
    provenance: Provenance,
    theta_db: Vec<f64>,
    p_out: Vec<f64>,
}

impl OutageCurve {
    pub fn new(
        provenance: Provenance,
        theta_grid: Vec<f64>,
        p_out: Vec<f64>,
    ) -> Result<Self, CurveError> {
        check_grid(&theta_grid, p_out.len())?;
        if theta_grid[0] <= 0.0 {
            return Err(CurveError::BadGrid);
        }
        if let Some((index, &value)) = p_out
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(CurveError::Probability { index, value });
        }
        Ok(Self {
            theta_grid,
            p_out,
            provenance,
        })
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn theta_db(&self) -> Vec<f64> {
        self.theta_grid.iter().map(|&t| to_db(t)).collect()
    }

    pub fn p_out(&self) -> &[f64] {
        &self.p_out
    }

    pub fn len(&self) -> usize {
        self.theta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_grid.is_empty()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.p_out.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_db,p_out\n");
        for (t, p) in self.theta_grid.iter().zip(&self.p_out) {
            let _ = writeln!(out, "{},{}", to_db(*t), p);
        }
        out
    }

    pub fn from_csv(text: &str, provenance: Provenance) -> Result<Self, CurveError> {
        let (db, cols) = read_columns(text, &["theta_db", "p_out"])?;
        let theta = db.iter().map(|&d| from_db(d)).collect();
        Self::new(
            provenance,
            theta,
            cols.into_iter().next().unwrap_or_default(),
        )
    }

    pub fn to_json(&self) -> Result<String, CurveError> {
        Ok(serde_json::to_string_pretty(&OutageCurveJson {
            provenance: self.provenance,
            theta_db: self.theta_db(),
            p_out: self.p_out.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self, CurveError> {
        let raw: OutageCurveJson = serde_json::from_str(text)?;
        Self::new(
            raw.provenance,
            raw.theta_db.iter().map(|&d| from_db(d)).collect(),
            raw.p_out,
        )
    }
}

/// Anything that tabulates a distribution function on a grid.
pub trait CdfCurve {
    fn support(&self) -> &[f64];
    fn probabilities(&self) -> &[f64];
}

impl CdfCurve for SummaryCurve {
    fn support(&self) -> &[f64] {
        &self.r_grid
    }
    fn probabilities(&self) -> &[f64] {
        &self.values
    }
}

impl CdfCurve for OutageCurve {
    fn support(&self) -> &[f64] {
        &self.theta_grid
    }
    fn probabilities(&self) -> &[f64] {
        &self.p_out
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `n` thresholds evenly spaced in dB between `lo_db` and `hi_db`, returned
/// on the linear scale.
pub fn db_grid(lo_db: f64, hi_db: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![from_db(lo_db)],
        _ => (0..n)
            .map(|i| from_db(lo_db + (hi_db - lo_db) * i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Distance grid `0, step, 2 step, …` up to and including `r_max`.
pub fn distance_grid(r_max: f64, step: f64) -> Vec<f64> {
    let n = (r_max / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn check_grid(grid: &[f64], values: usize) -> Result<(), CurveError> {
    if grid.is_empty() {
        return Err(CurveError::Empty);
    }
    if grid.len() != values {
        return Err(CurveError::LengthMismatch {
            grid: grid.len(),
            values,
        });
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CurveError::BadGrid);
    }
    Ok(())
}

fn nearest_index(grid: &[f64], x: f64) -> Option<usize> {
    grid.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
}

pub(crate) fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Reads a CSV whose first column is a grid and whose remaining columns are
/// values; the header must match `header` exactly.
pub(crate) fn read_columns(
    text: &str,
    header: &[&str],
) -> Result<(Vec<f64>, Vec<Vec<f64>>), CurveError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader.headers()?.clone();
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a != *b) {
        return Err(CurveError::Header {
            found: found.iter().collect::<Vec<_>>().join(","),
            expected: header.join(","),
        });
    }
    let mut grid = Vec::new();
    let mut cols = vec![Vec::new(); header.len() - 1];
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(CurveError::Row {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let parse = |s: &str, allow_empty: bool| -> Result<f64, CurveError> {
            if s.is_empty() && allow_empty {
                return Ok(f64::NAN);
            }
            s.parse::<f64>().map_err(|e| CurveError::Row {
                line,
                message: format!("{s:?}: {e}"),
            })
        };
        grid.push(parse(&record[0], false)?);
        for (i, col) in cols.iter_mut().enumerate() {
            col.push(parse(&record[i + 1], true)?);
        }
    }
    if grid.is_empty() {
        return Err(CurveError::Empty);
    }
    Ok((grid, cols))
}
