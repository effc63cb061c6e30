//! Vehicle-position traces: CSV ingestion and output, gap extraction,
//! empirical gap laws and synthetic trace generation.
//!
//! A trace is a CSV file with header `snapshot_id,lane_id,position_m` and an
//! optional JSON sidecar `<stem>.meta.json` holding
//! `{name, granularity_s, extent_m, lanes, ground_truth?}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::distr::{Distribution, Open01};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitting::{FitError, GapSample};
use crate::model::HardcoreLaneModel;
use crate::sampling::{
    sample_hardcore_lane_with, Extent, GapLaw, LaneRng, LaneSnapshot, RngSeed, SamplingError,
};
use crate::stats::Window;

pub const TRACE_HEADER: [&str; 3] = ["snapshot_id", "lane_id", "position_m"];
/// Snapshots dropped by default while the simulated road fills up.
pub const DEFAULT_DROP_FIRST: usize = 600;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unexpected header {0:?}, expected snapshot_id,lane_id,position_m")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("trace has no rows")]
    Empty,
    #[error("snapshot {snapshot}, lane {lane}: {source}")]
    Snapshot {
        snapshot: u64,
        lane: u32,
        source: SamplingError,
    },
    #[error("no vehicles for snapshot {snapshot}, lane {lane}")]
    Missing { snapshot: u64, lane: u32 },
    #[error("need at least {needed} vehicles, found {found}")]
    TooFewVehicles { needed: usize, found: usize },
    #[error("u = {0} outside [0, 1]")]
    Probability(f64),
    #[error("metadata: {0}")]
    Meta(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub lane_id: u32,
    pub lambda: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub name: String,
    pub granularity_s: f64,
    /// `[start, end]` of the observed road in meters.
    pub extent_m: [f64; 2],
    pub lanes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<GroundTruth>>,
}

impl TraceMetadata {
    pub fn extent(&self) -> Result<Extent, SamplingError> {
        Extent::new(self.extent_m[0], self.extent_m[1])
    }
}

/// Snapshots of a trace keyed by `(snapshot_id, lane_id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub metadata: TraceMetadata,
    snapshots: BTreeMap<(u64, u32), LaneSnapshot>,
}

impl TraceFile {
    pub fn new(metadata: TraceMetadata, snapshots: BTreeMap<(u64, u32), LaneSnapshot>) -> Self {
        Self {
            metadata,
            snapshots,
        }
    }

    pub fn get(&self, snapshot: u64, lane: u32) -> Option<&LaneSnapshot> {
        self.snapshots.get(&(snapshot, lane))
    }

    pub fn snapshots(&self) -> impl Iterator<Item = (&(u64, u32), &LaneSnapshot)> {
        self.snapshots.iter()
    }

    /// Distinct snapshot ids in increasing order.
    pub fn snapshot_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.snapshots.keys().map(|k| k.0).collect();
        ids.dedup();
        ids
    }

    /// Distinct lane ids in increasing order.
    pub fn lane_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.snapshots.keys().map(|k| k.1).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn n_rows(&self) -> usize {
        self.snapshots.values().map(|s| s.len()).sum()
    }

    /// Drops the first `n` snapshots (by id).
    pub fn drop_first(&self, n: usize) -> TraceFile {
        let keep: std::collections::BTreeSet<u64> =
            self.snapshot_ids().into_iter().skip(n).collect();
        TraceFile {
            metadata: self.metadata.clone(),
            snapshots: self
                .snapshots
                .iter()
                .filter(|(k, _)| keep.contains(&k.0))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = TRACE_HEADER.join(",");
        out.push('\n');
        for ((snap, lane), s) in &self.snapshots {
            for &x in s.positions() {
                let _ = writeln!(out, "{snap},{lane},{}", format_position(x));
            }
        }
        out
    }

    /// Writes the CSV and its metadata sidecar.
    pub fn write(&self, path: &Path) -> Result<(), TraceError> {
        let io = |source| TraceError::Io {
            path: path.to_path_buf(),
            source,
        };
        std::fs::write(path, self.to_csv()).map_err(io)?;
        let meta = sidecar_path(path);
        std::fs::write(&meta, serde_json::to_string_pretty(&self.metadata)?).map_err(|source| {
            TraceError::Io {
                path: meta.clone(),
                source,
            }
        })?;
        Ok(())
    }
}

/// Shortest representation that round-trips, with at least two decimals.
pub fn format_position(x: f64) -> String {
    let s = x.to_string();
    match s.find('.') {
        Some(dot) if s.len() - dot > 2 => s,
        _ => format!("{x:.2}"),
    }
}

/// `<dir>/<stem>.meta.json` next to a trace CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv_path.with_file_name(format!("{stem}.meta.json"))
}

pub fn parse_metadata(text: &str) -> Result<TraceMetadata, TraceError> {
    let meta: TraceMetadata = serde_json::from_str(text)?;
    meta.extent()?;
    Ok(meta)
}

/// Parses trace CSV text. Without metadata the extent is the range of the
/// observed positions and the lanes are those present.
pub fn parse_trace_str(
    text: &str,
    metadata: Option<TraceMetadata>,
) -> Result<TraceFile, TraceError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.len() != 3 || header.iter().zip(TRACE_HEADER).any(|(a, b)| a.trim() != b) {
        return Err(TraceError::Header(
            header.iter().collect::<Vec<_>>().join(","),
        ));
    }
    let mut groups: BTreeMap<(u64, u32), Vec<f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let row_err = |message: String| TraceError::Row { line, message };
        if record.len() != 3 {
            return Err(row_err(format!(
                "expected 3 fields, found {}",
                record.len()
            )));
        }
        let snap: u64 = record[0]
            .trim()
            .parse()
            .map_err(|e| row_err(format!("snapshot_id {:?}: {e}", &record[0])))?;
        let lane: u32 = record[1]
            .trim()
            .parse()
            .map_err(|e| row_err(format!("lane_id {:?}: {e}", &record[1])))?;
        let x: f64 = record[2]
            .trim()
            .parse()
            .map_err(|e| row_err(format!("position_m {:?}: {e}", &record[2])))?;
        if !x.is_finite() {
            return Err(row_err(format!("position {x} is not finite")));
        }
        if let Some(meta) = &metadata {
            if x < meta.extent_m[0] || x > meta.extent_m[1] {
                return Err(row_err(format!(
                    "position {x} outside extent [{}, {}]",
                    meta.extent_m[0], meta.extent_m[1]
                )));
            }
        }
        groups.entry((snap, lane)).or_default().push(x);
    }
    if groups.is_empty() {
        return Err(TraceError::Empty);
    }
    let metadata = match metadata {
        Some(m) => m,
        None => {
            let (lo, hi) = groups
                .values()
                .flatten()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                    (a.min(x), b.max(x))
                });
            let mut lanes: Vec<u32> = groups.keys().map(|k| k.1).collect();
            lanes.sort_unstable();
            lanes.dedup();
            TraceMetadata {
                name: String::from("unnamed"),
                granularity_s: 1.0,
                // a one-point trace still needs a nonempty extent
                extent_m: [lo, if hi > lo { hi } else { lo + 1.0 }],
                lanes,
                ground_truth: None,
            }
        }
    };
    let extent = metadata.extent()?;
    let mut snapshots = BTreeMap::new();
    for ((snap, lane), mut xs) in groups {
        xs.sort_by(f64::total_cmp);
        let before = xs.len();
        xs.dedup();
        if xs.len() < before {
            log::warn!(
                "snapshot {snap}, lane {lane}: collapsed {} duplicate positions",
                before - xs.len()
            );
        }
        let s = LaneSnapshot::new(xs, extent, lane).map_err(|source| TraceError::Snapshot {
            snapshot: snap,
            lane,
            source,
        })?;
        snapshots.insert((snap, lane), s);
    }
    Ok(TraceFile {
        metadata,
        snapshots,
    })
}

/// Reads a trace CSV and, when present, its metadata sidecar.
pub fn parse_trace(path: &Path) -> Result<TraceFile, TraceError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| TraceError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let text = read(path)?;
    let meta_path = sidecar_path(path);
    let metadata = if meta_path.exists() {
        Some(parse_metadata(&read(&meta_path)?)?)
    } else {
        None
    };
    parse_trace_str(&text, metadata)
}

/// Gaps between consecutive vehicles of one lane in one snapshot, restricted
/// to `window` when given.
pub fn gaps(
    trace: &TraceFile,
    snapshot: u64,
    lane: u32,
    window: Option<&Window>,
) -> Result<GapSample, TraceError> {
    let s = trace
        .get(snapshot, lane)
        .ok_or(TraceError::Missing { snapshot, lane })?;
    let p = s.positions();
    let inside = match window {
        Some(w) => &p[w.index_range(p)],
        None => p,
    };
    if inside.len() < 2 {
        return Err(TraceError::TooFewVehicles {
            needed: 2,
            found: inside.len(),
        });
    }
    let g = inside.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(GapSample::new(g, lane)?)
}

/// Gaps of one lane pooled over several snapshots.
pub fn pooled_gaps(
    trace: &TraceFile,
    snapshots: &[u64],
    lane: u32,
    window: Option<&Window>,
) -> Result<GapSample, TraceError> {
    let mut all = Vec::new();
    for &snap in snapshots {
        match gaps(trace, snap, lane, window) {
            Ok(g) => all.extend_from_slice(g.gaps()),
            Err(TraceError::Missing { .. }) | Err(TraceError::TooFewVehicles { .. }) => {}
            Err(TraceError::Fit(FitError::TooFewGaps(_))) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(GapSample::new(all, lane)?)
}

/// Piecewise-linear empirical CDF: the `i`-th smallest of `n` values has
/// probability `i/(n-1)` (zero-based), so inverse sampling interpolates
/// linearly between observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    support: Vec<f64>,
    mean: f64,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self, TraceError> {
        if values.is_empty() {
            return Err(TraceError::TooFewVehicles {
                needed: 1,
                found: 0,
            });
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(TraceError::Row {
                line: 0,
                message: format!("value {bad} is not finite"),
            });
        }
        values.sort_by(f64::total_cmp);
        let mean = if values.len() == 1 {
            values[0]
        } else {
            values.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() / (values.len() - 1) as f64
        };
        Ok(Self {
            support: values,
            mean,
        })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// CDF value at the `i`-th support point.
    pub fn probability(&self, i: usize) -> f64 {
        if self.support.len() == 1 {
            1.0
        } else {
            i as f64 / (self.support.len() - 1) as f64
        }
    }

    /// CDF of the interpolated law at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let s = &self.support;
        if x < s[0] {
            return 0.0;
        }
        if x >= s[s.len() - 1] {
            return 1.0;
        }
        let i = s.partition_point(|&v| v <= x);
        // s[i-1] ≤ x < s[i]
        let t = (x - s[i - 1]) / (s[i] - s[i - 1]);
        self.probability(i - 1) + t * (self.probability(i) - self.probability(i - 1))
    }

    pub fn inverse_sample(&self, u: f64) -> Result<f64, TraceError> {
        if !(0.0..=1.0).contains(&u) {
            return Err(TraceError::Probability(u));
        }
        Ok(self.quantile(u))
    }

    fn quantile(&self, u: f64) -> f64 {
        let n = self.support.len();
        if n == 1 {
            return self.support[0];
        }
        let pos = u * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        self.support[i] + t * (self.support[i + 1] - self.support[i])
    }

    pub fn max(&self) -> f64 {
        self.support[self.support.len() - 1]
    }
}

pub fn empirical_cdf(sample: &GapSample) -> Result<EmpiricalCdf, TraceError> {
    EmpiricalCdf::new(sample.gaps().to_vec())
}

impl GapLaw for EmpiricalCdf {
    fn draw_gap(&self, rng: &mut LaneRng) -> f64 {
        let u: f64 = rand::Rng::random(rng);
        self.quantile(u)
    }

    /// Size-biased gap by rejection, then a uniform point inside it.
    fn draw_residual(&self, rng: &mut LaneRng) -> f64 {
        let top = self.max();
        loop {
            let g = self.draw_gap(rng);
            let u: f64 = rand::Rng::random(rng);
            if u * top <= g {
                let v: f64 = Open01.sample(rng);
                return v * g;
            }
        }
    }

    fn mean_gap(&self) -> f64 {
        self.mean
    }
}

/// Synthetic trace: every snapshot draws each lane independently from its
/// model (lanes numbered from 1), with the generating parameters stored as
/// ground truth. Lane `j` of snapshot `s` uses stream `s · lanes + j`.
pub fn generate_synthetic_trace(
    models: &[HardcoreLaneModel],
    n_snapshots: usize,
    extent: Extent,
    seed: u64,
) -> Result<TraceFile, TraceError> {
    use rayon::prelude::*;
    let extent = Extent::new(extent.start, extent.end)?;
    let lanes = models.len() as u64;
    let snapshots = (0..n_snapshots as u64)
        .into_par_iter()
        .flat_map_iter(|snap| {
            models.iter().enumerate().map(move |(j, m)| {
                let lane = j as u32 + 1;
                let mut rng = RngSeed::new(seed, snap * lanes + j as u64).rng();
                sample_hardcore_lane_with(m, extent, lane, &mut rng).map(|s| ((snap, lane), s))
            })
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    let metadata = TraceMetadata {
        name: String::from("synthetic"),
        granularity_s: 1.0,
        extent_m: [extent.start, extent.end],
        lanes: (1..=models.len() as u32).collect(),
        ground_truth: Some(
            models
                .iter()
                .enumerate()
                .map(|(j, m)| GroundTruth {
                    lane_id: j as u32 + 1,
                    lambda: m.lambda(),
                    c: m.c(),
                })
                .collect(),
        ),
    };
    Ok(TraceFile {
        metadata,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str =
        "snapshot_id,lane_id,position_m\n0,1,100.00\n0,1,40.00\n0,1,0.00\n0,2,5.50\n1,1,7.25\n";

    #[test]
    fn parses_and_sorts() {
        let t = parse_trace_str(SMALL, None).unwrap();
        assert_eq!(t.get(0, 1).unwrap().positions(), &[0.0, 40.0, 100.0]);
        assert_eq!(t.snapshot_ids(), vec![0, 1]);
        assert_eq!(t.lane_ids(), vec![1, 2]);
        assert_eq!(t.metadata.extent_m, [0.0, 100.0]);
        let g = gaps(&t, 0, 1, None).unwrap();
        assert_eq!(g.gaps(), &[40.0, 60.0]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_trace_str("snapshot_id,lane_id,position_m\n", None),
            Err(TraceError::Empty)
        ));
        assert!(matches!(
            parse_trace_str("", None),
            Err(TraceError::Empty) | Err(TraceError::Header(_))
        ));
        assert!(matches!(
            parse_trace_str("a,b,c\n1,2,3\n", None),
            Err(TraceError::Header(_))
        ));
        match parse_trace_str("snapshot_id,lane_id,position_m\n0,1,2.0\n0,x,3.0\n", None) {
            Err(TraceError::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_trace_str("snapshot_id,lane_id,position_m\n0,1,NaN\n", None),
            Err(TraceError::Row { .. })
        ));
    }

    #[test]
    fn single_row_is_one_point_snapshot() {
        let t = parse_trace_str("snapshot_id,lane_id,position_m\n3,2,17.5\n", None).unwrap();
        assert_eq!(t.get(3, 2).unwrap().positions(), &[17.5]);
        assert!(matches!(
            gaps(&t, 3, 2, None),
            Err(TraceError::TooFewVehicles { .. })
        ));
    }

    #[test]
    fn duplicates_collapse() {
        let t = parse_trace_str(
            "snapshot_id,lane_id,position_m\n0,1,5.00\n0,1,1.00\n0,1,5.00\n",
            None,
        )
        .unwrap();
        assert_eq!(t.get(0, 1).unwrap().positions(), &[1.0, 5.0]);
    }

    #[test]
    fn metadata_extent_is_enforced() {
        let meta = TraceMetadata {
            name: "m".into(),
            granularity_s: 1.0,
            extent_m: [0.0, 50.0],
            lanes: vec![1, 2],
            ground_truth: None,
        };
        assert!(matches!(
            parse_trace_str(SMALL, Some(meta)),
            Err(TraceError::Row { line: 2, .. })
        ));
    }

    #[test]
    fn window_excludes_margin_vehicles() {
        let t = parse_trace_str(SMALL, None).unwrap();
        let w = Window::with_margin(Extent::new(0.0, 100.0).unwrap(), 10.0).unwrap();
        assert!(matches!(
            gaps(&t, 0, 1, Some(&w)),
            Err(TraceError::TooFewVehicles { found: 1, .. })
        ));
    }

    #[test]
    fn position_format_is_lossless() {
        for x in [0.0, 1.5, 1234.567891234, -3.0, 1e-7, 9999.99] {
            let s = format_position(x);
            assert!(s.split('.').nth(1).unwrap().len() >= 2, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empirical_cdf_interpolates() {
        let e = EmpiricalCdf::new(vec![20.0, 10.0]).unwrap();
        assert_eq!(e.inverse_sample(0.5).unwrap(), 15.0);
        assert_eq!(e.inverse_sample(0.0).unwrap(), 10.0);
        assert_eq!(e.inverse_sample(1.0).unwrap(), 20.0);
        assert!(e.inverse_sample(1.5).is_err());
        assert_eq!(e.cdf(12.5), 0.25);
        assert_eq!(e.mean_gap(), 15.0);
    }

    #[test]
    fn synthetic_generation_records_truth() {
        let models = [
            HardcoreLaneModel::from_intensity(0.0248, 7.10).unwrap(),
            HardcoreLaneModel::from_intensity(0.0205, 14.82).unwrap(),
        ];
        let t = generate_synthetic_trace(&models, 5, Extent::new(0.0, 2000.0).unwrap(), 1).unwrap();
        assert_eq!(t.snapshot_ids().len(), 5);
        assert_eq!(t.lane_ids(), vec![1, 2]);
        assert_eq!(t.metadata.ground_truth.as_ref().unwrap()[1].c, 14.82);
        for ((_, lane), s) in t.snapshots() {
            let c = models[*lane as usize - 1].c();
            assert!(s.gaps().iter().all(|&g| g >= c));
        }
        let again =
            generate_synthetic_trace(&models, 5, Extent::new(0.0, 2000.0).unwrap(), 1).unwrap();
        assert_eq!(t, again);
        assert_eq!(t.drop_first(3).snapshot_ids(), vec![3, 4]);
    }

    #[test]
    fn write_and_parse_round_trip() {
        let models = [HardcoreLaneModel::from_intensity(0.025, 16.0).unwrap()];
        let t = generate_synthetic_trace(&models, 3, Extent::new(0.0, 3000.0).unwrap(), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        t.write(&path).unwrap();
        assert!(dir.path().join("trace.meta.json").exists());
        assert_eq!(parse_trace(&path).unwrap(), t);
    }
}
