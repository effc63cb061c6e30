//! Direct simulation of SIR outage and interference moments.
//!
//! Each run is an independent draw from its own ChaCha8 substream (stream =
//! run index), and results are gathered in run order, so a curve depends on
//! the seed and the run count only, never on the number of worker threads.
//!
//! Per run the receiver sits at the origin and the transmitter one own-lane
//! gap `d` ahead. Own-lane interferers renew outward from the transmitter
//! (full power) and from the receiver backwards (backlobe, factor `g`).
//! Every other lane is drawn stationary over the roadway; its vehicles at
//! least the guard distance away interfere, through the backlobe when behind
//! the receiver. Each vehicle transmits with probability `ξ` and every link
//! sees unit-mean exponential fading.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::curves::{OutageCurve, Provenance};
use crate::model::HardcoreLaneModel;
use crate::outage::{LinkScenario, MomentTriple, OutageError};
use crate::quadrature::Integrator;
use crate::sampling::{exp1, GapLaw, LaneRng, RngSeed};
use crate::traces::EmpiricalCdf;

pub const DEFAULT_RUNS: usize = 100_000;
pub const DEFAULT_ROADWAY: f64 = 10_000.0;
/// Largest admissible ratio between the interference missed beyond the
/// roadway ends and the mean interference.
pub const TRUNCATION_LIMIT: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum McError {
    #[error("number of runs must be positive")]
    NoRuns,
    #[error("roadway length must be positive and finite, got {0}")]
    Roadway(f64),
    #[error(
        "a {length} m roadway misses up to {ratio:e} of the mean interference (limit {TRUNCATION_LIMIT:e}); use a longer roadway"
    )]
    Truncation { length: f64, ratio: f64 },
    #[error(
        "trace source has {found} other-lane gap laws but the scenario has {expected} other lanes"
    )]
    LaneCount { expected: usize, found: usize },
    #[error("link distance {d} must be positive")]
    LinkDistance { d: f64 },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Outage(#[from] OutageError),
}

/// Where vehicle positions come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum McSource {
    /// The lane models of the scenario; Poisson lanes are models with `c = 0`.
    Model,
    /// Empirical gap laws, one for the link lane and one per other lane in
    /// scenario order, sampled by linear interpolation.
    Trace {
        own: EmpiricalCdf,
        others: Vec<EmpiricalCdf>,
    },
}

/// Which interferers are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McScope {
    OwnLane,
    OtherLanes,
    AllLanes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_runs: usize,
    pub seed: u64,
    /// Total simulated road length in meters, centered on the receiver.
    pub roadway_length: f64,
    pub source: McSource,
    pub scope: McScope,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_runs: DEFAULT_RUNS,
            seed: 0,
            roadway_length: DEFAULT_ROADWAY,
            source: McSource::Model,
            scope: McScope::AllLanes,
            jobs: None,
        }
    }
}

/// Reproducibility record of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub n_runs: usize,
    pub roadway_length: f64,
    pub scope: McScope,
    /// SHA-256 of the JSON encoding of the scenario and the source.
    pub scenario_hash: String,
}

impl McConfig {
    pub fn manifest(&self, scenario: &LinkScenario) -> RunManifest {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(scenario).unwrap_or_default());
        h.update(serde_json::to_vec(&self.source).unwrap_or_default());
        let scenario_hash = h
            .finalize()
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                use std::fmt::Write as _;
                let _ = write!(s, "{b:02x}");
                s
            });
        RunManifest {
            seed: self.seed,
            n_runs: self.n_runs,
            roadway_length: self.roadway_length,
            scope: self.scope,
            scenario_hash,
        }
    }

    /// Checks the run count, the roadway and that the interference cut off at
    /// the roadway ends is negligible.
    pub fn validate(&self, scenario: &LinkScenario) -> Result<(), McError> {
        scenario.check(true)?;
        if self.n_runs == 0 {
            return Err(McError::NoRuns);
        }
        if !(self.roadway_length > 0.0 && self.roadway_length.is_finite()) {
            return Err(McError::Roadway(self.roadway_length));
        }
        if let McSource::Trace { others, .. } = &self.source {
            if others.len() != scenario.other_lanes.len() {
                return Err(McError::LaneCount {
                    expected: scenario.other_lanes.len(),
                    found: others.len(),
                });
            }
        }
        let ratio = self.truncation_ratio(scenario)?;
        if ratio >= TRUNCATION_LIMIT {
            return Err(McError::Truncation {
                length: self.roadway_length,
                ratio,
            });
        }
        Ok(())
    }

    /// Lane parameters used for the truncation bound; trace lanes are
    /// summarized by their shifted-exponential maximum-likelihood fit.
    fn lane_models(&self, scenario: &LinkScenario) -> Result<Vec<HardcoreLaneModel>, McError> {
        let mut models = vec![scenario.own_lane];
        match &self.source {
            McSource::Model => models.extend(scenario.other_lanes.iter().map(|l| l.model)),
            McSource::Trace { own, others } => {
                models.clear();
                for cdf in std::iter::once(own).chain(others) {
                    let c = cdf.support()[0].max(0.0);
                    let excess = cdf.mean_gap() - c;
                    let m = if excess > 0.0 {
                        HardcoreLaneModel::from_rate(1.0 / excess, c)
                    } else {
                        HardcoreLaneModel::ppp(1.0 / cdf.mean_gap())
                    };
                    models.push(m.map_err(OutageError::from)?);
                }
            }
        }
        Ok(models)
    }

    /// Bound on the interference beyond the roadway ends relative to the
    /// mean interference.
    pub fn truncation_ratio(&self, scenario: &LinkScenario) -> Result<f64, McError> {
        let (eta, xi, g) = (scenario.eta, scenario.xi, scenario.g);
        let models = self.lane_models(scenario)?;
        let half = 0.5 * self.roadway_length;
        let far = half.powf(1.0 - eta) / (eta - 1.0);
        let lanes: Vec<usize> = match self.scope {
            McScope::OwnLane => vec![0],
            McScope::OtherLanes => (1..models.len()).collect(),
            McScope::AllLanes => (0..models.len()).collect(),
        };
        let tail: f64 = lanes
            .iter()
            .map(|&i| models[i].lambda() * xi * (1.0 + g) * far)
            .sum();
        if tail == 0.0 {
            return Ok(0.0);
        }
        let mut mean = 0.0;
        for &i in &lanes {
            let m = &models[i];
            if i == 0 {
                if m.c() == 0.0 {
                    return Ok(0.0);
                }
                // link-distance average of the interference beyond the transmitter
                let behind = Integrator::with_tolerances(0.0, 1e-8)
                    .integrate_exp_tail(|d| (m.c() + d).powf(1.0 - eta), m.c(), m.mu())
                    .map_err(OutageError::from)?
                    .value;
                mean += m.lambda() * xi * (behind + g * m.c().powf(1.0 - eta)) / (eta - 1.0);
            } else {
                let r0 = crate::outage::guard_zone(scenario.other_lanes[i - 1].ell, scenario.phi)?;
                mean += m.lambda() * xi * (1.0 + g) * r0.powf(1.0 - eta) / (eta - 1.0);
            }
        }
        Ok(tail / mean)
    }

    /// Doubles the roadway length until the truncation check passes.
    pub fn with_sufficient_roadway(mut self, scenario: &LinkScenario) -> Result<Self, McError> {
        for _ in 0..16 {
            if self.truncation_ratio(scenario)? < TRUNCATION_LIMIT {
                return Ok(self);
            }
            self.roadway_length *= 2.0;
        }
        Err(McError::Truncation {
            length: self.roadway_length,
            ratio: self.truncation_ratio(scenario)?,
        })
    }

    fn run_in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, McError> {
        match self.jobs {
            None => Ok(f()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| McError::Pool(e.to_string()))?;
                Ok(pool.install(f))
            }
        }
    }
}

struct Lanes<'a> {
    own: &'a dyn GapLaw,
    others: Vec<(&'a dyn GapLaw, f64)>,
}

fn lanes<'a>(config: &'a McConfig, scenario: &'a LinkScenario) -> Result<Lanes<'a>, McError> {
    let r0s = scenario.guard_distances()?;
    Ok(match &config.source {
        McSource::Model => Lanes {
            own: &scenario.own_lane,
            others: scenario
                .other_lanes
                .iter()
                .zip(r0s)
                .map(|(l, r0)| (&l.model as &dyn GapLaw, r0))
                .collect(),
        },
        McSource::Trace { own, others } => Lanes {
            own,
            others: others
                .iter()
                .zip(r0s)
                .map(|(c, r0)| (c as &dyn GapLaw, r0))
                .collect(),
        },
    })
}

/// Received power of one potential interferer at distance `x`.
#[inline]
fn contribution(rng: &mut LaneRng, xi: f64, eta: f64, gain: f64, x: f64) -> f64 {
    if xi < 1.0 && rng.random::<f64>() >= xi {
        return 0.0;
    }
    gain * exp1(rng) * x.powf(-eta)
}

/// SIR of one run.
fn one_run(
    lanes: &Lanes,
    scenario: &LinkScenario,
    scope: McScope,
    half: f64,
    rng: &mut LaneRng,
) -> f64 {
    let (eta, xi, g) = (scenario.eta, scenario.xi, scenario.g);
    let d = lanes.own.draw_gap(rng);
    let mut interference = 0.0;
    if scope != McScope::OtherLanes {
        let mut x = d + lanes.own.draw_gap(rng);
        while x <= half {
            interference += contribution(rng, xi, eta, 1.0, x);
            x += lanes.own.draw_gap(rng);
        }
        let mut x = lanes.own.draw_gap(rng);
        while x <= half {
            interference += contribution(rng, xi, eta, g, x);
            x += lanes.own.draw_gap(rng);
        }
    }
    if scope != McScope::OwnLane {
        for &(law, r0) in &lanes.others {
            let mut x = -half + law.draw_residual(rng);
            while x <= half {
                if x >= r0 {
                    interference += contribution(rng, xi, eta, 1.0, x);
                } else if x <= -r0 {
                    interference += contribution(rng, xi, eta, g, -x);
                }
                x += law.draw_gap(rng);
            }
        }
    }
    let signal = exp1(rng) * d.powf(-eta);
    if interference > 0.0 {
        signal / interference
    } else {
        f64::INFINITY
    }
}

/// SIR of every run, in run order.
pub fn simulate_sir(config: &McConfig, scenario: &LinkScenario) -> Result<Vec<f64>, McError> {
    config.validate(scenario)?;
    let lanes = lanes(config, scenario)?;
    let half = 0.5 * config.roadway_length;
    let seed = config.seed;
    config.run_in_pool(|| {
        (0..config.n_runs as u64)
            .into_par_iter()
            .map(|run| {
                one_run(
                    &lanes,
                    scenario,
                    config.scope,
                    half,
                    &mut RngSeed::new(seed, run).rng(),
                )
            })
            .collect()
    })
}

/// Empirical outage `P̂(θ)`: the fraction of runs with SIR below `θ`.
pub fn simulate_outage(config: &McConfig, scenario: &LinkScenario) -> Result<OutageCurve, McError> {
    let mut sir = simulate_sir(config, scenario)?;
    sir.sort_by(f64::total_cmp);
    let n = sir.len() as f64;
    let p = scenario
        .theta_grid
        .iter()
        .map(|&theta| sir.partition_point(|&s| s < theta) as f64 / n)
        .collect();
    Ok(
        OutageCurve::new(Provenance::MonteCarlo, scenario.theta_grid.clone(), p)
            .map_err(OutageError::from)?,
    )
}

/// Interference at a receiver `d` meters behind a transmitter from the
/// own-lane vehicles beyond the transmitter, one value per run.
pub fn simulate_interference_samples(
    config: &McConfig,
    scenario: &LinkScenario,
    d: f64,
) -> Result<Vec<f64>, McError> {
    scenario.check(true)?;
    if config.n_runs == 0 {
        return Err(McError::NoRuns);
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(McError::LinkDistance { d });
    }
    let (eta, xi) = (scenario.eta, scenario.xi);
    let own: &dyn GapLaw = match &config.source {
        McSource::Model => &scenario.own_lane,
        McSource::Trace { own, .. } => own,
    };
    let half = 0.5 * config.roadway_length;
    config.run_in_pool(|| {
        (0..config.n_runs as u64)
            .into_par_iter()
            .map(|run| {
                let mut rng = RngSeed::new(config.seed, run).rng();
                let mut total = 0.0;
                let mut x = d + own.draw_gap(&mut rng);
                while x <= half {
                    total += contribution(&mut rng, xi, eta, 1.0, x);
                    x += own.draw_gap(&mut rng);
                }
                total
            })
            .collect()
    })
}

/// Sample mean, standard deviation and skewness of the interference beyond a
/// transmitter at distance `d`.
pub fn simulate_interference_moments(
    config: &McConfig,
    scenario: &LinkScenario,
    d: f64,
) -> Result<MomentTriple, McError> {
    let v = simulate_interference_samples(config, scenario, d)?;
    Ok(sample_moments(&v))
}

/// Mean, unbiased variance and moment skewness of `values`.
pub fn sample_moments(values: &[f64]) -> MomentTriple {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (m2, m3) = values.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - mean;
        (a + d * d, b + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    MomentTriple {
        mean,
        variance: if n > 1.0 { m2 * n / (n - 1.0) } else { 0.0 },
        skewness: if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::db_grid;
    use crate::outage::outage_own_lane_ppp;
    use crate::stats::ks_distance;

    fn reference() -> HardcoreLaneModel {
        HardcoreLaneModel::from_intensity(0.025, 16.0).unwrap()
    }

    fn scenario(model: HardcoreLaneModel) -> LinkScenario {
        LinkScenario::new(model, 3.0, 0.5, 0.01, std::f64::consts::PI / 20.0).unwrap()
    }

    fn config(n_runs: usize, scope: McScope) -> McConfig {
        McConfig {
            n_runs,
            seed: 17,
            scope,
            ..McConfig::default()
        }
    }

    #[test]
    fn reference_truncation_is_negligible() {
        let c = config(10, McScope::AllLanes);
        let r = c.truncation_ratio(&scenario(reference())).unwrap();
        assert!(r > 5e-5 && r < 1e-4, "{r}");
        let short = McConfig {
            roadway_length: 1000.0,
            ..c
        };
        assert!(matches!(
            short.validate(&scenario(reference())),
            Err(McError::Truncation { .. })
        ));
    }

    #[test]
    fn silent_network_never_fails() {
        let s = LinkScenario {
            xi: 0.0,
            ..scenario(reference())
        };
        let curve = simulate_outage(&config(2000, McScope::AllLanes), &s).unwrap();
        assert!(curve.p_out().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let s = scenario(reference())
            .with_other_lane(reference(), 6.0)
            .unwrap();
        let base = config(3000, McScope::AllLanes)
            .with_sufficient_roadway(&s)
            .unwrap();
        assert_eq!(base.roadway_length, 20_000.0);
        let one = McConfig {
            jobs: Some(1),
            ..base.clone()
        };
        let four = McConfig {
            jobs: Some(4),
            ..base
        };
        assert_eq!(
            simulate_sir(&one, &s).unwrap(),
            simulate_sir(&four, &s).unwrap()
        );
        assert_eq!(
            one.manifest(&s).scenario_hash,
            four.manifest(&s).scenario_hash
        );
        assert_eq!(one.manifest(&s).scenario_hash.len(), 64);
    }

    #[test]
    fn ppp_source_matches_closed_form() {
        let ppp = HardcoreLaneModel::ppp(0.025).unwrap();
        let s = scenario(ppp)
            .with_theta_grid(db_grid(-10.0, 20.0, 31))
            .unwrap();
        let mc = simulate_outage(&config(100_000, McScope::OwnLane), &s).unwrap();
        let exact = outage_own_lane_ppp(&s).unwrap();
        let ks = ks_distance(&mc, &exact).unwrap();
        assert!(ks <= 0.01, "KS {ks}");
    }

    #[test]
    fn ppp_palm_mean_recovered() {
        let ppp = HardcoreLaneModel::ppp(0.025).unwrap();
        let s = LinkScenario {
            xi: 1.0,
            ..scenario(ppp)
        };
        let m =
            simulate_interference_moments(&config(100_000, McScope::OwnLane), &s, 40.0).unwrap();
        let exact = 0.025 * 40f64.powi(-2) / 2.0;
        assert!((m.mean / exact - 1.0).abs() < 0.02, "{} vs {exact}", m.mean);
        assert!(m.skewness > 0.0);
    }

    #[test]
    fn trace_source_needs_matching_lanes() {
        let cdf = EmpiricalCdf::new(vec![20.0, 40.0, 60.0]).unwrap();
        let c = McConfig {
            source: McSource::Trace {
                own: cdf,
                others: vec![],
            },
            ..config(10, McScope::AllLanes)
        };
        let s = scenario(reference())
            .with_other_lane(reference(), 6.0)
            .unwrap();
        assert!(matches!(
            c.validate(&s),
            Err(McError::LaneCount {
                expected: 1,
                found: 0
            })
        ));
    }

    #[test]
    fn sample_moment_fixture() {
        let m = sample_moments(&[1.0, 2.0, 6.0]);
        assert_eq!(m.mean, 3.0);
        assert_eq!(m.variance, 7.0);
        // central moments 14/3 and 6
        let expected = 6.0 / (14.0f64 / 3.0).powf(1.5);
        assert!((m.skewness - expected).abs() < 1e-15);
    }
}
