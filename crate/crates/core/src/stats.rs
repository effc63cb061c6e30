//! Empirical summary statistics of lane snapshots.
//!
//! Boundary effects are handled by minus-sampling: reference points (and
//! contact probes) are restricted to an inner window whose edges are at
//! least `r_max` from the snapshot extent, while neighbors are looked up in
//! the whole snapshot.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{distance_grid, fmt_value, CdfCurve, CurveError, SummaryCurve, SummaryKind};
use crate::model::HardcoreLaneModel;
use crate::sampling::{sample_hardcore_lane_with, Extent, LaneRng, LaneSnapshot, RngSeed};

/// Ĵ is reported only where `1 - F̂` is at least this large.
pub const J_UNDEFINED_BELOW: f64 = 1e-6;
pub const DEFAULT_PROBES: usize = 10_000;
pub const DEFAULT_J_RMAX: f64 = 80.0;
pub const DEFAULT_L_RMAX: f64 = 500.0;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("window margin {margin} is smaller than r_max {r_max}")]
    MarginTooSmall { margin: f64, r_max: f64 },
    #[error("window is empty after removing a margin of {0} m")]
    EmptyWindow(f64),
    #[error("need at least {needed} points, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("number of contact probes must be positive")]
    ZeroProbes,
    #[error("curves are tabulated on different grids")]
    InconsistentGrids,
    #[error("no curves given")]
    NoCurves,
    #[error("curves have disjoint supports")]
    DisjointSupports,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Inner observation window `[start + margin, end - margin]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    start: f64,
    end: f64,
    margin: f64,
}

impl Window {
    /// Window for statistics evaluated up to `r_max`; requires
    /// `margin ≥ r_max`.
    pub fn inner(extent: Extent, margin: f64, r_max: f64) -> Result<Self, StatsError> {
        if !(margin >= r_max) {
            return Err(StatsError::MarginTooSmall { margin, r_max });
        }
        Self::with_margin(extent, margin)
    }

    /// Window with an arbitrary nonnegative margin.
    pub fn with_margin(extent: Extent, margin: f64) -> Result<Self, StatsError> {
        let (start, end) = (extent.start + margin, extent.end - margin);
        if !(margin >= 0.0) || !(end > start) {
            return Err(StatsError::EmptyWindow(margin));
        }
        Ok(Self { start, end, margin })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start && x <= self.end
    }

    /// Index range of the sorted `positions` lying inside the window.
    pub fn index_range(&self, positions: &[f64]) -> std::ops::Range<usize> {
        let lo = positions.partition_point(|&x| x < self.start);
        let hi = positions.partition_point(|&x| x <= self.end);
        lo..hi.max(lo)
    }
}

/// Pointwise band of a statistic over realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: SummaryKind,
    pub r_grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub n_realizations: usize,
}

impl Envelope {
    /// Whether `curve` lies inside the band at every grid point where both
    /// are defined.
    pub fn contains(&self, r_grid: &[f64], values: &[f64]) -> bool {
        r_grid.len() == self.r_grid.len()
            && r_grid.iter().zip(&self.r_grid).all(|(a, b)| a == b)
            && values
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| v.is_nan() || lo.is_nan() || (lo <= v && v <= hi))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,lower,upper\n");
        for i in 0..self.r_grid.len() {
            let _ = writeln!(
                out,
                "{},{},{}",
                self.r_grid[i],
                fmt_value(self.lower[i]),
                fmt_value(self.upper[i])
            );
        }
        out
    }

    pub fn from_csv(text: &str, kind: SummaryKind) -> Result<Self, StatsError> {
        let (r_grid, mut cols) = crate::curves::read_columns(text, &["r", "lower", "upper"])?;
        let upper = cols.pop().unwrap_or_default();
        let lower = cols.pop().unwrap_or_default();
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(StatsError::InconsistentGrids);
        }
        Ok(Self {
            kind,
            r_grid,
            lower,
            upper,
            n_realizations: 0,
        })
    }
}

/// Default grid for a statistic: 1 m steps up to 80 m for `J`, `G`, `F` and
/// up to 500 m for `K`, `L`.
pub fn default_grid(kind: SummaryKind) -> Vec<f64> {
    match kind {
        SummaryKind::K | SummaryKind::L => distance_grid(DEFAULT_L_RMAX, 1.0),
        _ => distance_grid(DEFAULT_J_RMAX, 1.0),
    }
}

/// Fraction of `sorted` values `≤ r` at each grid point.
pub fn ecdf_on_grid(sorted: &[f64], r_grid: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    r_grid
        .iter()
        .map(|&r| sorted.partition_point(|&x| x <= r) as f64 / n)
        .collect()
}

fn nearest_distance(positions: &[f64], x: f64) -> f64 {
    let i = positions.partition_point(|&p| p < x);
    let right = positions.get(i).map_or(f64::INFINITY, |&p| p - x);
    let left = if i > 0 {
        x - positions[i - 1]
    } else {
        f64::INFINITY
    };
    left.min(right)
}

/// Nearest-neighbor distances of the window points, neighbors taken from the
/// whole snapshot.
pub fn nn_distances(snapshot: &LaneSnapshot, window: &Window) -> Result<Vec<f64>, StatsError> {
    let p = snapshot.positions();
    let range = window.index_range(p);
    if range.is_empty() || p.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            found: range.len().min(p.len()),
        });
    }
    let mut d: Vec<f64> = range
        .map(|i| {
            let left = if i > 0 {
                p[i] - p[i - 1]
            } else {
                f64::INFINITY
            };
            let right = p.get(i + 1).map_or(f64::INFINITY, |&q| q - p[i]);
            left.min(right)
        })
        .collect();
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Distances from `n_probes` uniform window locations to the nearest
/// snapshot point.
pub fn contact_distances(
    snapshot: &LaneSnapshot,
    window: &Window,
    n_probes: usize,
    rng: &mut LaneRng,
) -> Result<Vec<f64>, StatsError> {
    if n_probes == 0 {
        return Err(StatsError::ZeroProbes);
    }
    let p = snapshot.positions();
    let mut d: Vec<f64> = (0..n_probes)
        .map(|_| {
            let x = window.start + rng.random::<f64>() * window.length();
            nearest_distance(p, x)
        })
        .collect();
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Ĝ on `r_grid`.
pub fn empirical_nn_cdf(
    snapshot: &LaneSnapshot,
    window: &Window,
    r_grid: &[f64],
) -> Result<SummaryCurve, StatsError> {
    let d = nn_distances(snapshot, window)?;
    Ok(SummaryCurve::new(
        SummaryKind::G,
        r_grid.to_vec(),
        ecdf_on_grid(&d, r_grid),
    )?)
}

/// F̂ on `r_grid` from `n_probes` uniform probes.
pub fn empirical_contact_cdf(
    snapshot: &LaneSnapshot,
    window: &Window,
    r_grid: &[f64],
    n_probes: usize,
    seed: RngSeed,
) -> Result<SummaryCurve, StatsError> {
    let d = contact_distances(snapshot, window, n_probes, &mut seed.rng())?;
    Ok(SummaryCurve::new(
        SummaryKind::F,
        r_grid.to_vec(),
        ecdf_on_grid(&d, r_grid),
    )?)
}

/// `(1 - G) / (1 - F)` pointwise, NaN where `1 - F < 1e-6`.
pub fn j_from_cdfs(g: &[f64], f: &[f64]) -> Vec<f64> {
    g.iter()
        .zip(f)
        .map(|(&g, &f)| {
            if 1.0 - f < J_UNDEFINED_BELOW {
                f64::NAN
            } else {
                (1.0 - g) / (1.0 - f)
            }
        })
        .collect()
}

/// Ĵ on `r_grid`.
pub fn empirical_j(
    snapshot: &LaneSnapshot,
    window: &Window,
    r_grid: &[f64],
    n_probes: usize,
    seed: RngSeed,
) -> Result<SummaryCurve, StatsError> {
    let g = empirical_nn_cdf(snapshot, window, r_grid)?;
    let f = empirical_contact_cdf(snapshot, window, r_grid, n_probes, seed)?;
    Ok(SummaryCurve::new(
        SummaryKind::J,
        r_grid.to_vec(),
        j_from_cdfs(g.values(), f.values()),
    )?)
}

/// Intensity estimate of a snapshot: inverse of its mean gap.
pub fn snapshot_intensity(snapshot: &LaneSnapshot) -> Result<f64, StatsError> {
    let p = snapshot.positions();
    if p.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            found: p.len(),
        });
    }
    Ok((p.len() - 1) as f64 / (p[p.len() - 1] - p[0]))
}

/// L̂ on `r_grid`: mean count of other points within `r` of a window point,
/// divided by `2 λ̂`.
pub fn empirical_l(
    snapshot: &LaneSnapshot,
    window: &Window,
    r_grid: &[f64],
) -> Result<SummaryCurve, StatsError> {
    let r_max = r_grid.last().copied().unwrap_or(0.0);
    let lambda = snapshot_intensity(snapshot)?;
    let p = snapshot.positions();
    let range = window.index_range(p);
    if range.is_empty() {
        return Err(StatsError::TooFewPoints {
            needed: 1,
            found: 0,
        });
    }
    let n_ref = range.len() as f64;
    let mut dists = Vec::new();
    for i in range {
        let mut j = i;
        while j > 0 && p[i] - p[j - 1] <= r_max {
            j -= 1;
            dists.push(p[i] - p[j]);
        }
        let mut j = i + 1;
        while j < p.len() && p[j] - p[i] <= r_max {
            dists.push(p[j] - p[i]);
            j += 1;
        }
    }
    dists.sort_by(f64::total_cmp);
    let values = r_grid
        .iter()
        .map(|&r| dists.partition_point(|&d| d <= r) as f64 / n_ref / (2.0 * lambda))
        .collect();
    Ok(SummaryCurve::new(SummaryKind::L, r_grid.to_vec(), values)?)
}

fn check_same_grid(curves: &[SummaryCurve]) -> Result<&SummaryCurve, StatsError> {
    let first = curves.first().ok_or(StatsError::NoCurves)?;
    if curves
        .iter()
        .any(|c| c.r_grid() != first.r_grid() || c.kind() != first.kind())
    {
        return Err(StatsError::InconsistentGrids);
    }
    Ok(first)
}

/// Pointwise min/max of curves on a common grid; NaN entries are skipped.
pub fn envelope_from_curves(curves: &[SummaryCurve]) -> Result<Envelope, StatsError> {
    let first = check_same_grid(curves)?;
    let n = first.len();
    let mut lower = vec![f64::NAN; n];
    let mut upper = vec![f64::NAN; n];
    for c in curves {
        for (i, &v) in c.values().iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            lower[i] = if lower[i].is_nan() {
                v
            } else {
                lower[i].min(v)
            };
            upper[i] = if upper[i].is_nan() {
                v
            } else {
                upper[i].max(v)
            };
        }
    }
    Ok(Envelope {
        kind: first.kind(),
        r_grid: first.r_grid().to_vec(),
        lower,
        upper,
        n_realizations: curves.len(),
    })
}

/// Pointwise mean of curves on a common grid, skipping NaN entries.
pub fn mean_curve(curves: &[SummaryCurve]) -> Result<SummaryCurve, StatsError> {
    let first = check_same_grid(curves)?;
    let values = (0..first.len())
        .map(|i| {
            let (s, n) = curves
                .iter()
                .map(|c| c.values()[i])
                .filter(|v| !v.is_nan())
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                f64::NAN
            } else {
                s / n as f64
            }
        })
        .collect();
    Ok(SummaryCurve::new(
        first.kind(),
        first.r_grid().to_vec(),
        values,
    )?)
}

/// Statistic of one snapshot; probes for Ĵ are drawn from `seed`.
pub fn statistic(
    kind: SummaryKind,
    snapshot: &LaneSnapshot,
    window: &Window,
    r_grid: &[f64],
    n_probes: usize,
    seed: RngSeed,
) -> Result<SummaryCurve, StatsError> {
    match kind {
        SummaryKind::J => empirical_j(snapshot, window, r_grid, n_probes, seed),
        SummaryKind::G => empirical_nn_cdf(snapshot, window, r_grid),
        SummaryKind::F => empirical_contact_cdf(snapshot, window, r_grid, n_probes, seed),
        SummaryKind::L => empirical_l(snapshot, window, r_grid),
        SummaryKind::K => {
            let l = empirical_l(snapshot, window, r_grid)?;
            let values = l.values().iter().map(|v| 2.0 * v).collect();
            Ok(SummaryCurve::new(SummaryKind::K, r_grid.to_vec(), values)?)
        }
        SummaryKind::Pcf => Err(StatsError::Curve(CurveError::Empty)),
    }
}

/// Envelope of a statistic over the given snapshots; snapshot `i` uses probe
/// stream `i` of `seed`.
pub fn envelope(
    kind: SummaryKind,
    snapshots: &[LaneSnapshot],
    margin: f64,
    r_grid: &[f64],
    n_probes: usize,
    seed: u64,
) -> Result<Envelope, StatsError> {
    let r_max = r_grid.last().copied().unwrap_or(0.0);
    let curves = snapshots
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let window = Window::inner(s.extent(), margin, r_max)?;
            statistic(
                kind,
                s,
                &window,
                r_grid,
                n_probes,
                RngSeed::new(seed, i as u64),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    envelope_from_curves(&curves)
}

/// Envelope of a statistic over `n_runs` stationary realizations of `model`.
/// Run `i` draws its lane from stream `2i` and its probes from `2i + 1`.
pub fn simulate_envelope(
    kind: SummaryKind,
    model: &HardcoreLaneModel,
    extent: Extent,
    margin: f64,
    r_grid: &[f64],
    n_runs: usize,
    seed: u64,
) -> Result<Envelope, StatsError> {
    let r_max = r_grid.last().copied().unwrap_or(0.0);
    let window = Window::inner(extent, margin, r_max)?;
    let curves = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let snap =
                sample_hardcore_lane_with(model, extent, 0, &mut RngSeed::new(seed, 2 * i).rng())
                    .map_err(|_| StatsError::EmptyWindow(margin))?;
            statistic(
                kind,
                &snap,
                &window,
                r_grid,
                DEFAULT_PROBES,
                RngSeed::new(seed, 2 * i + 1),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    envelope_from_curves(&curves)
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v < x);
    if i < xs.len() && xs[i] == x {
        return ys[i];
    }
    if i == 0 || i == xs.len() {
        return f64::NAN;
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// Largest vertical distance between two tabulated distribution functions.
/// Both are interpolated linearly onto the union of their grids over the
/// common support; undefined entries are skipped.
pub fn ks_distance<A: CdfCurve + ?Sized, B: CdfCurve + ?Sized>(
    a: &A,
    b: &B,
) -> Result<f64, StatsError> {
    let (xa, ya) = (a.support(), a.probabilities());
    let (xb, yb) = (b.support(), b.probabilities());
    if xa.is_empty() || xb.is_empty() {
        return Err(StatsError::DisjointSupports);
    }
    let lo = xa[0].max(xb[0]);
    let hi = xa[xa.len() - 1].min(xb[xb.len() - 1]);
    if lo > hi {
        return Err(StatsError::DisjointSupports);
    }
    let mut grid: Vec<f64> = xa
        .iter()
        .chain(xb)
        .copied()
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let d = grid
        .iter()
        .map(|&x| (interpolate(xa, ya, x) - interpolate(xb, yb, x)).abs())
        .filter(|d| !d.is_nan())
        .fold(0.0, f64::max);
    Ok(d)
}
