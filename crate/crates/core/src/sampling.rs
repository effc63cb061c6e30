//! Random lane realizations: stationary and Palm-conditioned Cowan M2 lanes,
//! Poisson lanes and link distances.
//!
//! Every generator draws from a ChaCha8 stream addressed by `(seed, stream)`,
//! so independent runs can be produced in any order, on any number of
//! threads, and still reproduce bit for bit.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::HardcoreLaneModel;

pub type LaneRng = ChaCha8Rng;

/// Expected vehicle count below which a stationary lane is too short to say
/// much about the model.
const MIN_EXPECTED_POINTS: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("extent [{start}, {end}] is empty or not finite")]
    DegenerateExtent { start: f64, end: f64 },
    #[error("positions must be finite and strictly increasing (index {0})")]
    Unsorted(usize),
    #[error("position {position} lies outside [{start}, {end}]")]
    OutsideExtent { position: f64, start: f64, end: f64 },
    #[error("intensity must be positive and finite, got {0}")]
    Intensity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> LaneRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }
}

/// Closed observation interval along the road, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub start: f64,
    pub end: f64,
}

impl Extent {
    pub fn new(start: f64, end: f64) -> Result<Self, SamplingError> {
        if start.is_finite() && end.is_finite() && end > start {
            Ok(Self { start, end })
        } else {
            Err(SamplingError::DegenerateExtent { start, end })
        }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start && x <= self.end
    }
}

/// Vehicle positions on one lane at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneSnapshot {
    positions: Vec<f64>,
    extent: Extent,
    lane_id: u32,
}

impl LaneSnapshot {
    pub fn new(positions: Vec<f64>, extent: Extent, lane_id: u32) -> Result<Self, SamplingError> {
        Extent::new(extent.start, extent.end)?;
        for (i, w) in positions.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(SamplingError::Unsorted(i + 1));
            }
        }
        if let Some(&position) = positions.iter().find(|&&x| !extent.contains(x)) {
            return Err(SamplingError::OutsideExtent {
                position,
                start: extent.start,
                end: extent.end,
            });
        }
        Ok(Self {
            positions,
            extent,
            lane_id,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn lane_id(&self) -> u32 {
        self.lane_id
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// A law for the spacing between consecutive vehicles of a lane.
pub trait GapLaw: Sync {
    /// One gap.
    fn draw_gap(&self, rng: &mut LaneRng) -> f64;

    /// Distance from an arbitrary (independent) location to the next vehicle
    /// of the stationary lane: the forward recurrence time of the renewal
    /// process.
    fn draw_residual(&self, rng: &mut LaneRng) -> f64;

    fn mean_gap(&self) -> f64;
}

/// Standard exponential draw, strictly positive.
pub(crate) fn exp1(rng: &mut LaneRng) -> f64 {
    let u: f64 = Open01.sample(rng);
    -u.ln()
}

impl GapLaw for HardcoreLaneModel {
    fn draw_gap(&self, rng: &mut LaneRng) -> f64 {
        self.c() + exp1(rng) / self.mu()
    }

    /// Inverts the equilibrium CDF `λx` on `[0, c]` and
    /// `λ(c + (1 - e^{-μ(x-c)})/μ)` beyond.
    fn draw_residual(&self, rng: &mut LaneRng) -> f64 {
        let u: f64 = Open01.sample(rng);
        let (lambda, c, mu) = (self.lambda(), self.c(), self.mu());
        if u <= lambda * c {
            u / lambda
        } else {
            c - (-mu * (u / lambda - c)).ln_1p() / mu
        }
    }

    fn mean_gap(&self) -> f64 {
        HardcoreLaneModel::mean_gap(self)
    }
}

/// Positions of a stationary renewal lane over `extent`, drawn from `rng`.
pub fn sample_renewal_positions<L: GapLaw + ?Sized>(
    law: &L,
    extent: Extent,
    rng: &mut LaneRng,
) -> Vec<f64> {
    let expected = extent.length() / law.mean_gap();
    let mut positions = Vec::with_capacity((expected * 1.1) as usize + 8);
    let mut x = extent.start + law.draw_residual(rng);
    while x <= extent.end {
        positions.push(x);
        x += law.draw_gap(rng);
    }
    positions
}

/// Stationary Cowan M2 lane over `extent`, started from the equilibrium
/// residual so there is no boundary transient.
pub fn sample_hardcore_lane(
    model: &HardcoreLaneModel,
    extent: Extent,
    seed: RngSeed,
) -> Result<LaneSnapshot, SamplingError> {
    sample_hardcore_lane_with(model, extent, 0, &mut seed.rng())
}

pub fn sample_hardcore_lane_with(
    model: &HardcoreLaneModel,
    extent: Extent,
    lane_id: u32,
    rng: &mut LaneRng,
) -> Result<LaneSnapshot, SamplingError> {
    let extent = Extent::new(extent.start, extent.end)?;
    let expected = model.lambda() * extent.length();
    if expected < MIN_EXPECTED_POINTS {
        log::warn!(
            "extent of {:.1} m holds only {expected:.1} expected vehicles",
            extent.length()
        );
    }
    let positions = sample_renewal_positions(model, extent, rng);
    LaneSnapshot::new(positions, extent, lane_id)
}

/// Lane seen from one of its vehicles: a point at the origin, with i.i.d.
/// gaps renewing outward on both sides up to `extent_behind` and
/// `extent_front`.
pub fn sample_palm_conditioned(
    model: &HardcoreLaneModel,
    extent_behind: f64,
    extent_front: f64,
    seed: RngSeed,
) -> Result<LaneSnapshot, SamplingError> {
    sample_palm_conditioned_with(model, extent_behind, extent_front, &mut seed.rng())
}

pub fn sample_palm_conditioned_with(
    model: &HardcoreLaneModel,
    extent_behind: f64,
    extent_front: f64,
    rng: &mut LaneRng,
) -> Result<LaneSnapshot, SamplingError> {
    let extent = Extent::new(-extent_behind, extent_front)?;
    if !(extent_behind > 0.0 && extent_front > 0.0) {
        return Err(SamplingError::DegenerateExtent {
            start: extent.start,
            end: extent.end,
        });
    }
    let mut behind = Vec::new();
    let mut x = -model.draw_gap(rng);
    while x >= extent.start {
        behind.push(x);
        x -= model.draw_gap(rng);
    }
    behind.reverse();
    behind.push(0.0);
    let mut x = model.draw_gap(rng);
    while x <= extent.end {
        behind.push(x);
        x += model.draw_gap(rng);
    }
    LaneSnapshot::new(behind, extent, 0)
}

/// Homogeneous Poisson lane with intensity `lambda` over `extent`.
pub fn sample_ppp_lane(
    lambda: f64,
    extent: Extent,
    seed: RngSeed,
) -> Result<LaneSnapshot, SamplingError> {
    sample_ppp_lane_with(lambda, extent, 0, &mut seed.rng())
}

pub fn sample_ppp_lane_with(
    lambda: f64,
    extent: Extent,
    lane_id: u32,
    rng: &mut LaneRng,
) -> Result<LaneSnapshot, SamplingError> {
    let extent = Extent::new(extent.start, extent.end)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SamplingError::Intensity(lambda));
    }
    let count = Poisson::new(lambda * extent.length())
        .map_err(|_| SamplingError::Intensity(lambda))?
        .sample(rng) as usize;
    let mut positions: Vec<f64> = (0..count)
        .map(|_| extent.start + rng.random::<f64>() * extent.length())
        .collect();
    positions.sort_by(f64::total_cmp);
    positions.dedup();
    LaneSnapshot::new(positions, extent, lane_id)
}

/// Transmitter–receiver distance: one gap of the lane, `c + Exp(μ)`.
pub fn sample_link_distance(model: &HardcoreLaneModel, seed: RngSeed) -> f64 {
    model.draw_gap(&mut seed.rng())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> HardcoreLaneModel {
        HardcoreLaneModel::from_intensity(0.025, 16.0).unwrap()
    }

    fn ten_km() -> Extent {
        Extent::new(0.0, 10_000.0).unwrap()
    }

    #[test]
    fn snapshot_validation() {
        let e = Extent::new(0.0, 100.0).unwrap();
        assert!(LaneSnapshot::new(vec![1.0, 5.0, 99.0], e, 2).is_ok());
        assert_eq!(
            LaneSnapshot::new(vec![1.0, 1.0], e, 0),
            Err(SamplingError::Unsorted(1))
        );
        assert!(matches!(
            LaneSnapshot::new(vec![1.0, 101.0], e, 0),
            Err(SamplingError::OutsideExtent { .. })
        ));
        assert!(Extent::new(3.0, 3.0).is_err());
    }

    #[test]
    fn identical_seeds_reproduce() {
        let m = reference();
        let a = sample_hardcore_lane(&m, ten_km(), RngSeed::new(9, 4)).unwrap();
        let b = sample_hardcore_lane(&m, ten_km(), RngSeed::new(9, 4)).unwrap();
        let c = sample_hardcore_lane(&m, ten_km(), RngSeed::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn hardcore_count_and_min_gap() {
        let m = reference();
        let runs = 1000;
        let mut total = 0usize;
        for s in 0..runs {
            let snap = sample_hardcore_lane(&m, ten_km(), RngSeed::new(1, s)).unwrap();
            assert!(snap.gaps().iter().all(|&g| g >= 16.0));
            total += snap.len();
        }
        let mean = total as f64 / runs as f64;
        assert!((mean / 250.0 - 1.0).abs() < 0.02, "mean count {mean}");
    }

    #[test]
    fn poisson_limit_gap_mean() {
        let m = HardcoreLaneModel::ppp(0.05).unwrap();
        let snap = sample_hardcore_lane(&m, Extent::new(0.0, 1e6).unwrap(), 3.into()).unwrap();
        let gaps = snap.gaps();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!((mean * 0.05 - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn contact_distance_is_stationary_from_the_left_edge() {
        // distance from the left edge to the first vehicle follows F, the
        // contact law seen one-sidedly: P(first ≤ r) = λ r on [0, c]
        let m = reference();
        let mut rng = RngSeed::new(5, 0).rng();
        let n = 100_000;
        let mut below_c = 0;
        for _ in 0..n {
            if m.draw_residual(&mut rng) <= 16.0 {
                below_c += 1;
            }
        }
        let p = below_c as f64 / n as f64;
        assert!((p - 0.4).abs() < 0.01, "{p}");
    }

    #[test]
    fn palm_nearest_neighbor_matches_g() {
        let m = reference();
        let mut rng = RngSeed::new(11, 0).rng();
        let n = 100_000;
        let mut nn: Vec<f64> = (0..n)
            .map(|_| {
                let s = sample_palm_conditioned_with(&m, 300.0, 300.0, &mut rng).unwrap();
                let p = s.positions();
                let o = p.iter().position(|&x| x == 0.0).unwrap();
                (-p[o - 1]).min(p[o + 1])
            })
            .collect();
        nn.sort_by(f64::total_cmp);
        assert!(nn[0] >= 16.0);
        let sup = nn
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let g = m.nearest_neighbor_cdf(r);
                (g - i as f64 / n as f64)
                    .abs()
                    .max((g - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(sup <= 0.01, "sup distance {sup}");
    }

    #[test]
    fn ppp_gaps_are_exponential() {
        let lambda = 0.02;
        let snap = sample_ppp_lane(lambda, Extent::new(0.0, 5.0e6).unwrap(), 8.into()).unwrap();
        let mut gaps = snap.gaps();
        assert!(gaps.len() > 90_000);
        gaps.sort_by(f64::total_cmp);
        let n = gaps.len() as f64;
        let sup = gaps
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let f = 1.0 - (-lambda * g).exp();
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(sup <= 0.01, "{sup}");
    }

    #[test]
    fn link_distance_mean_and_support() {
        let m = reference();
        let mut rng = RngSeed::new(2, 0).rng();
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let d = m.draw_gap(&mut rng);
            assert!(d >= 16.0);
            sum += d;
        }
        assert!((sum / n as f64 / 40.0 - 1.0).abs() < 0.005);
        assert!(sample_link_distance(&m, 1.into()) >= 16.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn hardcore_snapshots_respect_c(
            lambda in 0.005f64..0.1, packing in 0.0f64..0.95, seed in any::<u64>(),
        ) {
            let m = HardcoreLaneModel::from_intensity(lambda, packing / lambda).unwrap();
            let snap = sample_hardcore_lane(&m, Extent::new(-500.0, 2500.0).unwrap(), seed.into()).unwrap();
            prop_assert!(snap.gaps().iter().all(|&g| g >= m.c()));
        }
    }
}
