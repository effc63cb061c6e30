//! Interference moments, shifted-gamma Laplace transforms and SIR outage
//! probabilities for hardcore and Poisson lanes.
//!
//! Geometry: the receiver sits at the origin facing the transmitter at
//! distance `r` ahead. Own-lane vehicles beyond the transmitter interfere at
//! full power; own-lane vehicles behind the receiver reach it through the
//! antenna backlobe, attenuated by `g`. Vehicles on other lanes interfere only
//! once they are at least the guard distance `r0` away along the road, again
//! attenuated by `g` behind the receiver. Transmit power is one and the
//! pathloss is `x^{-η}`, so the Laplace transforms are evaluated at
//! `s = θ r^η`. Fading is Rayleigh.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{db_grid, CurveError, OutageCurve, Provenance};
use crate::fitting::FitResult;
use crate::model::{HardcoreLaneModel, ModelError};
use crate::quadrature::{Integrator, QuadratureError};
use crate::special::{hyp2f1_outage, hyp2f1_unit_shift_deficit, pi_csc};

/// Absolute tolerance of every outage integral.
pub const OUTAGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OutageError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("link distance {d} is shorter than the hardcore distance {c}")]
    LinkDistance { d: f64, c: f64 },
    #[error(
        "interference from behind the receiver needs c > 0; use the Poisson formulas for c = 0"
    )]
    NoHardcore,
    #[error("guard zone needs 0 < φ < π and ℓ > 0, got ℓ = {ell}, φ = {phi}")]
    GuardZone { ell: f64, phi: f64 },
    #[error("guard distance must be positive, got {0}")]
    GuardDistance(f64),
    #[error("moment matching needs finite moments with positive skewness, got {0:?}")]
    Moments(MomentTriple),
    #[error("no fit for link lane {0}")]
    MissingLinkLane(u32),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// A lane adjacent to the link, `ell` meters away laterally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtherLane {
    pub model: HardcoreLaneModel,
    pub ell: f64,
}

/// Radio parameters and lanes of one link experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    /// Pathloss exponent.
    pub eta: f64,
    /// Probability that a vehicle transmits.
    pub xi: f64,
    /// Backlobe power attenuation.
    pub g: f64,
    /// Antenna beamwidth in radians.
    pub phi: f64,
    /// SIR thresholds, linear scale.
    pub theta_grid: Vec<f64>,
    /// Lane of the link; the link distance is one of its gaps.
    pub own_lane: HardcoreLaneModel,
    pub other_lanes: Vec<OtherLane>,
}

pub fn default_theta_grid() -> Vec<f64> {
    db_grid(-10.0, 20.0, 61)
}

impl LinkScenario {
    /// Single-lane scenario on the default threshold grid.
    pub fn new(
        own_lane: HardcoreLaneModel,
        eta: f64,
        xi: f64,
        g: f64,
        phi: f64,
    ) -> Result<Self, OutageError> {
        let s = Self {
            eta,
            xi,
            g,
            phi,
            theta_grid: default_theta_grid(),
            own_lane,
            other_lanes: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_other_lane(
        mut self,
        model: HardcoreLaneModel,
        ell: f64,
    ) -> Result<Self, OutageError> {
        self.other_lanes.push(OtherLane { model, ell });
        self.validate()?;
        Ok(self)
    }

    pub fn with_theta_grid(mut self, theta_grid: Vec<f64>) -> Result<Self, OutageError> {
        self.theta_grid = theta_grid;
        self.validate()?;
        Ok(self)
    }

    /// Scenario built from per-lane fits: the fit of `link_lane` becomes the
    /// own lane and every other fit an adjacent lane at lateral distance
    /// `lane_spacing · |lane - link_lane|`.
    pub fn from_fits(
        fits: &[FitResult],
        link_lane: u32,
        lane_spacing: f64,
        template: &LinkScenario,
    ) -> Result<Self, OutageError> {
        let own = fits
            .iter()
            .find(|f| f.lane_id == link_lane)
            .ok_or(OutageError::MissingLinkLane(link_lane))?;
        let mut s = Self {
            own_lane: own.to_model()?,
            other_lanes: Vec::new(),
            ..template.clone()
        };
        for f in fits.iter().filter(|f| f.lane_id != link_lane) {
            let ell = lane_spacing * (f.lane_id as f64 - link_lane as f64).abs();
            s.other_lanes.push(OtherLane {
                model: f.to_model()?,
                ell,
            });
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), OutageError> {
        self.check(false)
    }

    /// As [`validate`](Self::validate) but also accepts `ξ = 0`, a silent
    /// network that only simulation can evaluate.
    pub(crate) fn check(&self, allow_silent: bool) -> Result<(), OutageError> {
        let bad = |m: &str| Err(OutageError::Scenario(m.to_string()));
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return bad("pathloss exponent must exceed 1");
        }
        let xi_ok = if allow_silent {
            (0.0..=1.0).contains(&self.xi)
        } else {
            self.xi > 0.0 && self.xi <= 1.0
        };
        if !xi_ok {
            return bad("activity probability must lie in (0, 1]");
        }
        if !(self.g > 0.0 && self.g < 1.0) {
            return bad("backlobe attenuation must lie in (0, 1)");
        }
        if !(self.phi > 0.0 && self.phi < std::f64::consts::PI) {
            return bad("beamwidth must lie in (0, π)");
        }
        if self.theta_grid.is_empty()
            || self.theta_grid[0] <= 0.0
            || self.theta_grid.iter().any(|t| !t.is_finite())
            || self.theta_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("thresholds must be positive, finite and increasing");
        }
        if self
            .other_lanes
            .iter()
            .any(|l| !(l.ell > 0.0 && l.ell.is_finite()))
        {
            return bad("lateral lane distances must be positive");
        }
        Ok(())
    }

    /// Guard distance of each other lane.
    pub fn guard_distances(&self) -> Result<Vec<f64>, OutageError> {
        self.other_lanes
            .iter()
            .map(|l| guard_zone(l.ell, self.phi))
            .collect()
    }
}

/// Mean, variance and skewness of an interference power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTriple {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

impl MomentTriple {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Shifted gamma law `ε + Gamma(k, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedGammaApprox {
    pub k: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// The matched shift came out negative and was set to zero, with `β`
    /// refitted to keep the mean.
    pub clamped: bool,
}

impl ShiftedGammaApprox {
    /// `E[e^{-sI}] = e^{-sε} (1 + sβ)^{-k}`.
    pub fn laplace(&self, s: f64) -> f64 {
        (-s * self.epsilon - self.k * (s * self.beta).ln_1p()).exp()
    }

    pub fn moments(&self) -> MomentTriple {
        MomentTriple {
            mean: self.epsilon + self.k * self.beta,
            variance: self.k * self.beta * self.beta,
            skewness: 2.0 / self.k.sqrt(),
        }
    }
}

/// Matches `k = 4/S²`, `β = √(V/k)`, `ε = E - kβ`.
pub fn shifted_gamma_from_moments(m: MomentTriple) -> Result<ShiftedGammaApprox, OutageError> {
    if !(m.skewness > 0.0
        && m.skewness.is_finite()
        && m.variance >= 0.0
        && m.variance.is_finite()
        && m.mean.is_finite())
    {
        return Err(OutageError::Moments(m));
    }
    let k = 4.0 / (m.skewness * m.skewness);
    let beta = (m.variance / k).sqrt();
    let epsilon = m.mean - k * beta;
    if epsilon < 0.0 {
        return Ok(ShiftedGammaApprox {
            k,
            beta: m.mean / k,
            epsilon: 0.0,
            clamped: true,
        });
    }
    Ok(ShiftedGammaApprox {
        k,
        beta,
        epsilon,
        clamped: false,
    })
}

/// Moments of a lane of interferers starting at `start` with gap law
/// `model`, scaled by `gain`, using `ρ⁽²⁾ ≈ λ²` beyond one hardcore distance.
fn chain_moments(lambda: f64, c: f64, xi: f64, eta: f64, start: f64, gain: f64) -> MomentTriple {
    let lx = lambda * xi;
    let corr = 1.0 - lambda * c * xi;
    let mean = gain * lx * start.powf(1.0 - eta) / (eta - 1.0);
    let variance = gain * 2.0 * lx * start.powf(1.0 - 2.0 * eta) * corr / (2.0 * eta - 1.0);
    let third = gain * 6.0 * lx * start.powf(1.0 - 3.0 * eta) * corr * corr / (3.0 * eta - 1.0);
    MomentTriple {
        mean,
        variance,
        skewness: third / variance.powf(1.5),
    }
}

/// Moments of the own-lane interference from vehicles beyond a transmitter
/// at distance `d` from the receiver.
pub fn palm_moments_behind(
    model: &HardcoreLaneModel,
    scenario: &LinkScenario,
    d: f64,
) -> Result<MomentTriple, OutageError> {
    if !(d >= model.c()) || (model.c() + d) <= 0.0 {
        return Err(OutageError::LinkDistance { d, c: model.c() });
    }
    Ok(chain_moments(
        model.lambda(),
        model.c(),
        scenario.xi,
        scenario.eta,
        model.c() + d,
        1.0,
    ))
}

/// Moments of the own-lane interference from vehicles behind the receiver,
/// through the backlobe. Independent of the link distance.
pub fn palm_moments_front(
    model: &HardcoreLaneModel,
    scenario: &LinkScenario,
) -> Result<MomentTriple, OutageError> {
    if model.c() <= 0.0 {
        return Err(OutageError::NoHardcore);
    }
    Ok(chain_moments(
        model.lambda(),
        model.c(),
        scenario.xi,
        scenario.eta,
        model.c(),
        scenario.g,
    ))
}

/// Moments of the interference from one other lane, both sides of the
/// receiver, beyond the guard distance `r0`.
pub fn moments_other_lane(
    model: &HardcoreLaneModel,
    scenario: &LinkScenario,
    r0: f64,
) -> Result<MomentTriple, OutageError> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(OutageError::GuardDistance(r0));
    }
    let (lambda, c, xi, eta, g) = (
        model.lambda(),
        model.c(),
        scenario.xi,
        scenario.eta,
        scenario.g,
    );
    let lx = lambda * xi;
    let lcx = lambda * c * xi;
    let mean = lx * (1.0 + g) * r0.powf(1.0 - eta) / (eta - 1.0);
    let variance = 2.0 * lx * (1.0 + g) * r0.powf(1.0 - 2.0 * eta) * (1.0 - lcx + 0.5 * lcx * lcx)
        / (2.0 * eta - 1.0);
    let base = 2.0 * lx * r0.powf(1.0 - 2.0 * eta) / (2.0 * eta - 1.0);
    let skewness = 6.0 * lx * r0.powf(1.0 - 3.0 * eta) / ((3.0 * eta - 1.0) * (1.0 + g).sqrt())
        * base.powf(-1.5)
        * (1.0 - 0.5 * lcx);
    Ok(MomentTriple {
        mean,
        variance,
        skewness,
    })
}

/// Distance along the road at which a lane `ell` meters away enters a beam
/// of width `phi`: `r0 = ℓ / tan(φ/2)`.
pub fn guard_zone(ell: f64, phi: f64) -> Result<f64, OutageError> {
    if !(phi > 0.0 && phi < std::f64::consts::PI && ell > 0.0 && ell.is_finite()) {
        return Err(OutageError::GuardZone { ell, phi });
    }
    Ok(ell / (0.5 * phi).tan())
}

/// `t(r, r0, θ) = ∫_{r0}^∞ θr^η x^{-η} / (1 + θr^η x^{-η}) dx`, the exponent
/// of a Poisson lane beyond `r0` per unit intensity.
pub fn t_function(r: f64, r0: f64, theta: f64, eta: f64) -> f64 {
    if r <= 0.0 || theta <= 0.0 {
        return 0.0;
    }
    // r0 · [bπ/sin(πb) z^{-b} - 2F1(1, b; 1+b; -z)] with b = 1/η
    let z = (r0 / r).powf(eta) / theta;
    r0 * hyp2f1_unit_shift_deficit(1.0 / eta, z)
}

fn integrator() -> Integrator {
    Integrator::with_tolerances(OUTAGE_TOLERANCE, 0.0)
}

fn curve(
    scenario: &LinkScenario,
    provenance: Provenance,
    point: impl Fn(f64) -> Result<f64, OutageError> + Sync,
) -> Result<OutageCurve, OutageError> {
    let p = scenario
        .theta_grid
        .par_iter()
        .map(|&theta| point(theta).map(|v| v.clamp(0.0, 1.0)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OutageCurve::new(
        provenance,
        scenario.theta_grid.clone(),
        p,
    )?)
}

/// Outage at one threshold for a hardcore own lane and the given other-lane
/// transforms.
fn multilane_hc_point(
    own: &HardcoreLaneModel,
    others: &[ShiftedGammaApprox],
    front: &ShiftedGammaApprox,
    scenario: &LinkScenario,
    theta: f64,
) -> Result<f64, OutageError> {
    let eta = scenario.eta;
    let covered = integrator().integrate_exp_tail(
        |r| {
            let s = theta * r.powf(eta);
            let behind =
                match palm_moments_behind(own, scenario, r).and_then(shifted_gamma_from_moments) {
                    Ok(sg) => sg.laplace(s),
                    Err(_) => return f64::NAN,
                };
            others
                .iter()
                .fold(behind * front.laplace(s), |acc, sg| acc * sg.laplace(s))
        },
        own.c(),
        own.mu(),
    )?;
    Ok(1.0 - covered.value)
}

fn hc_other_lane_gammas(scenario: &LinkScenario) -> Result<Vec<ShiftedGammaApprox>, OutageError> {
    scenario
        .other_lanes
        .iter()
        .zip(scenario.guard_distances()?)
        .map(|(l, r0)| shifted_gamma_from_moments(moments_other_lane(&l.model, scenario, r0)?))
        .collect()
}

/// Own-lane outage for a hardcore lane: the product of the shifted-gamma
/// transforms of the interference beyond the transmitter (depending on the
/// link distance) and behind the receiver, averaged over the link distance.
pub fn outage_own_lane_hc(
    model: &HardcoreLaneModel,
    scenario: &LinkScenario,
) -> Result<OutageCurve, OutageError> {
    scenario.validate()?;
    let front = shifted_gamma_from_moments(palm_moments_front(model, scenario)?)?;
    curve(scenario, Provenance::HcAnalytic, |theta| {
        multilane_hc_point(model, &[], &front, scenario, theta)
    })
}

/// Own-lane outage for a Poisson lane in closed form; the intensity cancels.
pub fn outage_own_lane_ppp(scenario: &LinkScenario) -> Result<OutageCurve, OutageError> {
    scenario.validate()?;
    let (eta, xi, g) = (scenario.eta, scenario.xi, scenario.g);
    curve(scenario, Provenance::PppAnalytic, |theta| {
        let f = 1.0 + pi_csc(eta) * xi * (g * theta).powf(1.0 / eta);
        let h = hyp2f1_outage(eta, theta).map_err(|e| OutageError::Scenario(e.to_string()))?;
        Ok(1.0 - (eta - 1.0) / ((eta - 1.0) * f + xi * theta * h))
    })
}

/// The same Poisson own-lane outage evaluated as a double integral over the
/// link distance and the interferer positions, for cross-checking.
pub fn outage_own_lane_ppp_integral(
    lambda: f64,
    scenario: &LinkScenario,
) -> Result<OutageCurve, OutageError> {
    scenario.validate()?;
    let (eta, xi, g) = (scenario.eta, scenario.xi, scenario.g);
    let inner = Integrator::with_tolerances(1e-13, 1e-11);
    curve(scenario, Provenance::PppAnalytic, |theta| {
        let covered = integrator().integrate_exp_tail(
            |r| {
                let s = theta * r.powf(eta);
                let beyond = inner
                    .integrate_semi_infinite(|x| s * x.powf(-eta) / (1.0 + s * x.powf(-eta)), r, r)
                    .map(|q| q.value);
                let behind = inner
                    .integrate_semi_infinite(
                        |x| 1.0 / (1.0 + x.powf(eta) / (g * s)),
                        0.0,
                        r * (g * theta).powf(1.0 / eta),
                    )
                    .map(|q| q.value);
                match (beyond, behind) {
                    (Ok(a), Ok(b)) => (-lambda * xi * (a + b)).exp(),
                    _ => f64::NAN,
                }
            },
            0.0,
            lambda,
        )?;
        Ok(1.0 - covered.value)
    })
}

/// Outage caused by one other hardcore lane beyond `r0`, with the link
/// distance drawn from the scenario's own lane.
pub fn outage_other_lane_hc(
    model: &HardcoreLaneModel,
    scenario: &LinkScenario,
    r0: f64,
) -> Result<OutageCurve, OutageError> {
    scenario.validate()?;
    let sg = shifted_gamma_from_moments(moments_other_lane(model, scenario, r0)?)?;
    let own = scenario.own_lane;
    let eta = scenario.eta;
    curve(scenario, Provenance::HcAnalytic, |theta| {
        let covered = integrator().integrate_exp_tail(
            |r| sg.laplace(theta * r.powf(eta)),
            own.c(),
            own.mu(),
        )?;
        Ok(1.0 - covered.value)
    })
}

/// Outage caused by one other Poisson lane of intensity `lambda` beyond
/// `r0`, with an exponential link distance of the same intensity.
pub fn outage_other_lane_ppp(
    lambda: f64,
    scenario: &LinkScenario,
    r0: f64,
) -> Result<OutageCurve, OutageError> {
    scenario.validate()?;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(OutageError::GuardDistance(r0));
    }
    let (eta, xi, g) = (scenario.eta, scenario.xi, scenario.g);
    curve(scenario, Provenance::PppAnalytic, |theta| {
        let covered = integrator().integrate_exp_tail(
            |r| (-lambda * xi * (1.0 + g) * t_function(r, r0, theta, eta)).exp(),
            0.0,
            lambda,
        )?;
        Ok(1.0 - covered.value)
    })
}

/// Multi-lane outage with every lane hardcore: own-lane transforms as in
/// [`outage_own_lane_hc`] times one shifted-gamma transform per other lane,
/// averaged over the own-lane gap law.
pub fn outage_multilane_hc(scenario: &LinkScenario) -> Result<OutageCurve, OutageError> {
    scenario.validate()?;
    let own = scenario.own_lane;
    let front = shifted_gamma_from_moments(palm_moments_front(&own, scenario)?)?;
    let others = hc_other_lane_gammas(scenario)?;
    curve(scenario, Provenance::HcAnalytic, |theta| {
        multilane_hc_point(&own, &others, &front, scenario, theta)
    })
}

/// Multi-lane outage with every lane Poisson at the intensities of the
/// scenario's lanes (hardcore distances are ignored).
pub fn outage_multilane_ppp(scenario: &LinkScenario) -> Result<OutageCurve, OutageError> {
    scenario.validate()?;
    let (eta, xi, g) = (scenario.eta, scenario.xi, scenario.g);
    let own_lambda = scenario.own_lane.lambda();
    let others: Vec<(f64, f64)> = scenario
        .other_lanes
        .iter()
        .zip(scenario.guard_distances()?)
        .map(|(l, r0)| (l.model.lambda(), r0))
        .collect();
    curve(scenario, Provenance::PppAnalytic, |theta| {
        let h = hyp2f1_outage(eta, theta).map_err(|e| OutageError::Scenario(e.to_string()))?;
        let own_rate =
            own_lambda * xi * (theta * h / (eta - 1.0) + pi_csc(eta) * (g * theta).powf(1.0 / eta));
        let covered = integrator().integrate_exp_tail(
            |r| {
                let exponent = others.iter().fold(own_rate * r, |acc, &(lambda, r0)| {
                    acc + lambda * xi * (1.0 + g) * t_function(r, r0, theta, eta)
                });
                (-exponent).exp()
            },
            0.0,
            own_lambda,
        )?;
        Ok(1.0 - covered.value)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference() -> HardcoreLaneModel {
        HardcoreLaneModel::from_intensity(0.025, 16.0).unwrap()
    }

    fn scenario() -> LinkScenario {
        LinkScenario::new(reference(), 3.0, 0.5, 0.01, std::f64::consts::PI / 20.0).unwrap()
    }

    #[test]
    fn scenario_validation() {
        let s = scenario();
        assert_eq!(s.theta_grid.len(), 61);
        for bad in [
            LinkScenario {
                eta: 1.0,
                ..s.clone()
            },
            LinkScenario {
                xi: 0.0,
                ..s.clone()
            },
            LinkScenario {
                g: 1.0,
                ..s.clone()
            },
            LinkScenario {
                phi: 4.0,
                ..s.clone()
            },
            LinkScenario {
                theta_grid: vec![1.0, 0.5],
                ..s.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
        assert!(s.clone().with_other_lane(reference(), -1.0).is_err());
    }

    #[test]
    fn behind_moments_reference_point() {
        let m = palm_moments_behind(&reference(), &scenario(), 40.0).unwrap();
        assert_relative_eq!(m.mean, 0.0125 * 56f64.powi(-2) / 2.0, max_relative = 1e-14);
        assert!((m.mean / 1.993e-6 - 1.0).abs() < 1e-3);
        assert!((m.std_dev() / 2.695e-6 - 1.0).abs() < 1e-3);
        assert!((m.skewness - 3.17).abs() < 0.01);
        assert!(matches!(
            palm_moments_behind(&reference(), &scenario(), 10.0),
            Err(OutageError::LinkDistance { .. })
        ));
    }

    #[test]
    fn behind_moments_limits() {
        let s = scenario();
        let silent = LinkScenario {
            xi: 1e-12,
            ..s.clone()
        };
        let m = palm_moments_behind(&reference(), &silent, 40.0).unwrap();
        assert!(m.mean < 1e-16 && m.variance < 1e-20);
        let ppp = HardcoreLaneModel::ppp(0.025).unwrap();
        let m = palm_moments_behind(&ppp, &s, 40.0).unwrap();
        assert_relative_eq!(m.mean, 0.0125 * 40f64.powi(-2) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            m.variance,
            2.0 * 0.0125 * 40f64.powi(-5) / 5.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn front_moments() {
        let s = scenario();
        let m = palm_moments_front(&reference(), &s).unwrap();
        assert_relative_eq!(m.mean, 0.01 * 0.0125 / 256.0 / 2.0, max_relative = 1e-14);
        assert!((m.mean / 2.441e-7 - 1.0).abs() < 1e-3);
        // same as the behind chain at d = 0, scaled by g
        let behind0 = chain_moments(0.025, 16.0, 0.5, 3.0, 16.0, 1.0);
        assert_relative_eq!(m.mean, 0.01 * behind0.mean, max_relative = 1e-14);
        assert_relative_eq!(m.variance, 0.01 * behind0.variance, max_relative = 1e-14);
        assert!(matches!(
            palm_moments_front(&HardcoreLaneModel::ppp(0.025).unwrap(), &s),
            Err(OutageError::NoHardcore)
        ));
    }

    #[test]
    fn other_lane_moments() {
        let s = scenario();
        let m = moments_other_lane(&reference(), &s, 75.0).unwrap();
        assert_relative_eq!(
            m.mean,
            0.0125 * 1.01 / (75.0 * 75.0) / 2.0,
            max_relative = 1e-14
        );
        assert!((m.mean / 1.122e-6 - 1.0).abs() < 1e-3);
        let ppp = moments_other_lane(&HardcoreLaneModel::ppp(0.025).unwrap(), &s, 75.0).unwrap();
        assert_relative_eq!(
            ppp.variance,
            2.0 * 0.0125 * 1.01 * 75f64.powi(-5) / 5.0,
            max_relative = 1e-14
        );
        assert!(moments_other_lane(&reference(), &s, 0.0).is_err());
    }

    #[test]
    fn guard_zone_values() {
        let pi = std::f64::consts::PI;
        assert!((guard_zone(6.0, pi / 20.0).unwrap() - 75.0).abs() < 1.5);
        assert!((guard_zone(4.0, pi / 20.0).unwrap() - 50.0).abs() < 1.0);
        assert_relative_eq!(
            guard_zone(3.0, pi / 2.0).unwrap(),
            3.0,
            max_relative = 1e-15
        );
        assert!(guard_zone(3.0, pi).is_err());
    }

    #[test]
    fn shifted_gamma_matching() {
        let sg = shifted_gamma_from_moments(MomentTriple {
            mean: 1.0,
            variance: 1.0,
            skewness: 2.0,
        })
        .unwrap();
        assert_eq!(
            (sg.k, sg.beta, sg.epsilon, sg.clamped),
            (1.0, 1.0, 0.0, false)
        );
        let m = palm_moments_behind(&reference(), &scenario(), 40.0).unwrap();
        let sg = shifted_gamma_from_moments(m).unwrap();
        assert!((sg.k - 0.398).abs() < 1e-3);
        assert!((sg.beta / 4.27e-6 - 1.0).abs() < 2e-3);
        assert!((sg.epsilon / 2.9e-7 - 1.0).abs() < 0.02);
        let back = sg.moments();
        assert_relative_eq!(back.mean, m.mean, max_relative = 1e-12);
        assert_relative_eq!(back.variance, m.variance, max_relative = 1e-12);
        assert_relative_eq!(back.skewness, m.skewness, max_relative = 1e-12);
        assert!(shifted_gamma_from_moments(MomentTriple {
            mean: 1.0,
            variance: 1.0,
            skewness: 0.0
        })
        .is_err());
    }

    #[test]
    fn negative_shift_is_clamped_keeping_the_mean() {
        let m = MomentTriple {
            mean: 1.0,
            variance: 4.0,
            skewness: 1.0,
        };
        let sg = shifted_gamma_from_moments(m).unwrap();
        assert!(sg.clamped);
        assert_eq!(sg.epsilon, 0.0);
        assert_relative_eq!(sg.moments().mean, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn t_function_matches_quadrature() {
        let q = Integrator::with_tolerances(1e-13, 1e-12);
        for &eta in &[2.0, 3.0, 4.0] {
            for &(r, r0, theta) in &[
                (40.0, 75.0, 1.0),
                (10.0, 50.0, 0.1),
                (200.0, 50.0, 30.0),
                (5.0, 76.0, 0.1),
            ] {
                let s = theta * f64::powf(r, eta);
                let direct = q
                    .integrate_semi_infinite(
                        |x| s * x.powf(-eta) / (1.0 + s * x.powf(-eta)),
                        r0,
                        r0,
                    )
                    .unwrap()
                    .value;
                assert!(
                    (t_function(r, r0, theta, eta) - direct).abs() < 1e-8,
                    "{eta} {r} {r0} {theta}"
                );
            }
        }
    }

    #[test]
    fn ppp_closed_form_matches_double_integral() {
        for eta in [2.0, 3.0, 4.0] {
            let s = LinkScenario {
                eta,
                theta_grid: db_grid(-20.0, 20.0, 9),
                ..scenario()
            };
            let closed = outage_own_lane_ppp(&s).unwrap();
            let integral = outage_own_lane_ppp_integral(0.025, &s).unwrap();
            for (a, b) in closed.p_out().iter().zip(integral.p_out()) {
                assert!((a - b).abs() <= 1e-6, "eta {eta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ppp_closed_form_ignores_intensity() {
        let a = outage_own_lane_ppp(&scenario()).unwrap();
        let other = LinkScenario {
            own_lane: HardcoreLaneModel::ppp(0.05).unwrap(),
            ..scenario()
        };
        assert_eq!(a.p_out(), outage_own_lane_ppp(&other).unwrap().p_out());
    }

    #[test]
    fn own_lane_hc_limits() {
        let s = LinkScenario {
            theta_grid: vec![1e-6, 1.0, 1e6],
            ..scenario()
        };
        let c = outage_own_lane_hc(&reference(), &s).unwrap();
        assert!(c.p_out()[0] < 1e-3);
        assert!(c.p_out()[2] > 0.999);
        assert!(c.is_nondecreasing());
    }

    #[test]
    fn multilane_without_other_lanes_is_own_lane() {
        let s = scenario();
        let a = outage_own_lane_hc(&reference(), &s).unwrap();
        let b = outage_multilane_hc(&s).unwrap();
        assert_eq!(a.p_out(), b.p_out());
        let ppp_scenario = LinkScenario {
            own_lane: HardcoreLaneModel::ppp(0.025).unwrap(),
            ..s
        };
        let closed = outage_own_lane_ppp(&ppp_scenario).unwrap();
        let ml = outage_multilane_ppp(&ppp_scenario).unwrap();
        for (x, y) in closed.p_out().iter().zip(ml.p_out()) {
            assert!((x - y).abs() < 1e-7);
        }
    }

    #[test]
    fn far_other_lane_is_harmless() {
        let s = scenario();
        let hc = outage_other_lane_hc(&reference(), &s, 1e7).unwrap();
        let ppp = outage_other_lane_ppp(0.025, &s, 1e7).unwrap();
        assert!(hc.p_out().iter().chain(ppp.p_out()).all(|&p| p < 1e-6));
    }

    #[test]
    fn from_fits_picks_the_link_lane() {
        use crate::fitting::FitMethod;
        let fit = |lane_id, lambda_hat, c| FitResult {
            lane_id,
            method: FitMethod::Lsq2,
            lambda_hat,
            c_hat: Some(c),
            rss: None,
            clamped: false,
            c_raw: None,
        };
        let fits = [
            fit(1, 0.0248, 7.1),
            fit(2, 0.0218, 11.05),
            fit(3, 0.0205, 14.82),
        ];
        let s = LinkScenario::from_fits(&fits, 2, 4.0, &scenario()).unwrap();
        assert_eq!(s.own_lane.c(), 11.05);
        assert_eq!(
            s.other_lanes.iter().map(|l| l.ell).collect::<Vec<_>>(),
            vec![4.0, 4.0]
        );
        assert!(matches!(
            LinkScenario::from_fits(&fits, 7, 4.0, &scenario()),
            Err(OutageError::MissingLinkLane(7))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn curves_are_monotone_bounded(
            c in 1.0f64..30.0, packing in 0.05f64..0.6, eta in 2.1f64..5.0,
            xi in 0.05f64..1.0, g in 0.001f64..0.5, ell in 2.0f64..12.0,
        ) {
            let model = HardcoreLaneModel::from_intensity(packing / c, c).unwrap();
            let s = LinkScenario { eta, xi, g, theta_grid: db_grid(-30.0, 30.0, 13), ..scenario() };
            let s = LinkScenario { own_lane: model, ..s }.with_other_lane(model, ell).unwrap();
            for curve in [
                outage_multilane_hc(&s).unwrap(),
                outage_multilane_ppp(&s).unwrap(),
                outage_own_lane_ppp(&s).unwrap(),
            ] {
                prop_assert!(curve.is_nondecreasing(), "{:?}", curve.p_out());
                prop_assert!(curve.p_out().iter().all(|p| (0.0..=1.0).contains(p)));
            }
        }

        #[test]
        fn outage_grows_with_activity(xi in 0.05f64..0.9, dxi in 0.01f64..0.1) {
            let s = LinkScenario { theta_grid: db_grid(-10.0, 20.0, 7), ..scenario() };
            let lo = outage_own_lane_hc(&reference(), &LinkScenario { xi, ..s.clone() }).unwrap();
            let hi = outage_own_lane_hc(&reference(), &LinkScenario { xi: xi + dxi, ..s }).unwrap();
            for (a, b) in lo.p_out().iter().zip(hi.p_out()) {
                prop_assert!(b >= a);
            }
        }
    }
}
