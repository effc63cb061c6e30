//! The nine end-to-end validation checks, shared by the `acceptance` test
//! target and the `replicate-paper` command. Each check runs its experiment,
//! compares against tolerances pinned below and reports what it measured.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{db_grid, OutageCurve, SummaryKind};
use crate::fitting::{fit_hc_mle, fit_lsq, fit_mom, fit_ppp_mle, FitResult, GapSample};
use crate::model::HardcoreLaneModel;
use crate::montecarlo::{
    simulate_interference_moments, simulate_outage, McConfig, McScope, McSource,
};
use crate::outage::{
    guard_zone, outage_multilane_hc, outage_multilane_ppp, outage_other_lane_hc,
    outage_other_lane_ppp, outage_own_lane_hc, outage_own_lane_ppp, outage_own_lane_ppp_integral,
    palm_moments_behind, shifted_gamma_from_moments, LinkScenario, MomentTriple,
};
use crate::quadrature::Integrator;
use crate::sampling::{sample_hardcore_lane, sample_hardcore_lane_with, Extent, RngSeed};
use crate::special::{hyp2f1_guardzone, hyp2f1_outage, ln_factorial, regularized_upper_gamma};
use crate::stats::{
    empirical_contact_cdf, empirical_l, empirical_nn_cdf, ks_distance, simulate_envelope, Window,
    DEFAULT_PROBES,
};
use crate::traces::{empirical_cdf, generate_synthetic_trace, pooled_gaps};
use crate::Error;

pub const J_REL_TOL: f64 = 0.02;
pub const L_REL_TOL: f64 = 0.01;
pub const MEAN_STD_REL_TOL: f64 = 0.05;
pub const SKEW_REL_TOL: f64 = 0.10;
pub const PPP_INTEGRAL_TOL: f64 = 1e-6;
pub const PPP_MC_KS: f64 = 0.01;
pub const OWN_LANE_KS: f64 = 0.03;
pub const OTHER_LANE_HC_KS: f64 = 0.03;
pub const OTHER_LANE_PPP_KS: f64 = 0.02;
pub const MULTILANE_KS: f64 = 0.05;
pub const LSQ_C_REL_TOL: f64 = 0.10;
pub const LSQ_LAMBDA_REL_TOL: f64 = 0.05;
pub const LSQ_MIN_SUCCESSES: usize = 95;
pub const GAMMA_TOL: f64 = 1e-12;
pub const HYP2F1_TOL: f64 = 1e-8;

/// Experiment sizes; the default is the full protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationConfig {
    pub seed: u64,
    /// Monte-Carlo runs per outage or moment experiment.
    pub mc_runs: usize,
    /// Lane realizations averaged for the summary statistics.
    pub realizations: usize,
    /// Wall-clock limits are only enforced for the full protocol.
    pub enforce_runtime: bool,
}

impl Default for ReplicationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mc_runs: 100_000,
            realizations: 10_000,
            enforce_runtime: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {} ({}) [{:.1} s]: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.details
        )
    }
}

struct Outcome {
    passed: bool,
    details: String,
}

fn timed(
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    config: &ReplicationConfig,
    body: impl FnOnce() -> Result<Outcome, Error>,
) -> CriterionOutcome {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let (mut passed, mut details) = match result {
        Ok(o) => (o.passed, o.details),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit.filter(|_| config.enforce_runtime) {
        if elapsed > limit {
            passed = false;
            details.push_str(&format!(
                "; runtime {:.0} s exceeds {} s",
                elapsed.as_secs_f64(),
                limit.as_secs()
            ));
        }
    }
    CriterionOutcome {
        id,
        name,
        passed,
        details,
        seconds: elapsed.as_secs_f64(),
    }
}

fn rel_err(estimate: f64, reference: f64) -> f64 {
    ((estimate - reference) / reference).abs()
}

fn mc(config: &ReplicationConfig, scope: McScope, source: McSource) -> McConfig {
    McConfig {
        n_runs: config.mc_runs,
        seed: config.seed,
        source,
        scope,
        ..McConfig::default()
    }
}

fn simulate(
    config: &ReplicationConfig,
    scope: McScope,
    source: McSource,
    scenario: &LinkScenario,
) -> Result<OutageCurve, Error> {
    let mc = mc(config, scope, source).with_sufficient_roadway(scenario)?;
    Ok(simulate_outage(&mc, scenario)?)
}

/// `λ = 0.025`, `c = 16`, `η = 3`, `ξ = 0.5`, `g = 0.01`.
fn reference_scenario() -> Result<LinkScenario, Error> {
    let own = HardcoreLaneModel::from_intensity(0.025, 16.0)?;
    Ok(LinkScenario::new(own, 3.0, 0.5, 0.01, PI / 20.0)?)
}

/// Mean Ĵ and L̂ over stationary realizations against the closed forms.
pub fn criterion_1(config: &ReplicationConfig) -> CriterionOutcome {
    timed(
        1,
        "summary statistics",
        Some(Duration::from_secs(120)),
        config,
        || {
            let model = HardcoreLaneModel::from_intensity(0.025, 16.0)?;
            let extent = Extent::new(0.0, 10_000.0)?;
            let j_at = [5.0, 12.0, 40.0];
            let l_at = [20.0, 50.0, 200.0];
            let window = Window::inner(extent, 200.0, 200.0)?;
            let n = config.realizations;
            let sums = (0..n as u64)
                .into_par_iter()
                .map(|i| -> Result<Vec<f64>, Error> {
                    let snap =
                        sample_hardcore_lane(&model, extent, RngSeed::new(config.seed, 2 * i))?;
                    let g = empirical_nn_cdf(&snap, &window, &j_at)?;
                    let f = empirical_contact_cdf(
                        &snap,
                        &window,
                        &j_at,
                        DEFAULT_PROBES,
                        RngSeed::new(config.seed, 2 * i + 1),
                    )?;
                    let l = empirical_l(&snap, &window, &l_at)?;
                    Ok([g.values(), f.values(), l.values()].concat())
                })
                .try_reduce(
                    || vec![0.0; 9],
                    |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
                )?;
            let mean: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
            let mut passed = true;
            let mut parts = Vec::new();
            for (i, &r) in j_at.iter().enumerate() {
                let j_hat = (1.0 - mean[i]) / (1.0 - mean[3 + i]);
                let err = rel_err(j_hat, model.j_function(r));
                passed &= err <= J_REL_TOL;
                parts.push(format!(
                    "J({r})={j_hat:.4} vs {:.4} ({:.2}%)",
                    model.j_function(r),
                    100.0 * err
                ));
            }
            for (i, &r) in l_at.iter().enumerate() {
                let err = rel_err(mean[6 + i], model.l_function(r));
                passed &= err <= L_REL_TOL;
                parts.push(format!(
                    "L({r})={:.3} vs {:.3} ({:.2}%)",
                    mean[6 + i],
                    model.l_function(r),
                    100.0 * err
                ));
            }
            Ok(Outcome {
                passed,
                details: format!("{n} realizations; {}", parts.join(", ")),
            })
        },
    )
}

/// Interference moments beyond a transmitter at 40 m, analytic vs simulated.
pub fn criterion_2(config: &ReplicationConfig) -> CriterionOutcome {
    timed(
        2,
        "interference moments",
        Some(Duration::from_secs(300)),
        config,
        || {
            let d = 40.0;
            let mut passed = true;
            let mut parts = Vec::new();
            for c in [0.0, 4.0, 8.0, 12.0, 16.0, 20.0] {
                let model = HardcoreLaneModel::from_intensity(0.025, c)?;
                let scenario = LinkScenario::new(model, 3.0, 0.5, 0.01, PI / 20.0)?;
                let analytic = palm_moments_behind(&model, &scenario, d)?;
                let sim = simulate_interference_moments(
                    &mc(config, McScope::OwnLane, McSource::Model),
                    &scenario,
                    d,
                )?;
                let e = [
                    rel_err(analytic.mean, sim.mean),
                    rel_err(analytic.std_dev(), sim.std_dev()),
                    rel_err(analytic.skewness, sim.skewness),
                ];
                let ok =
                    e[0] <= MEAN_STD_REL_TOL && e[1] <= MEAN_STD_REL_TOL && e[2] <= SKEW_REL_TOL;
                passed &= ok;
                parts.push(format!(
                    "c={c}: mean {:.1}%, std {:.1}%, skew {:.1}%{}",
                    100.0 * e[0],
                    100.0 * e[1],
                    100.0 * e[2],
                    if ok { "" } else { " (out of tolerance)" }
                ));
            }
            Ok(Outcome {
                passed,
                details: parts.join("; "),
            })
        },
    )
}

/// Poisson own-lane outage: closed form vs integral form vs simulation.
pub fn criterion_3(config: &ReplicationConfig) -> CriterionOutcome {
    timed(3, "Poisson exactness", None, config, || {
        let lane = HardcoreLaneModel::ppp(0.025)?;
        let mut worst: f64 = 0.0;
        for eta in [2.0, 3.0, 4.0] {
            let s = LinkScenario::new(lane, eta, 0.5, 0.01, PI / 20.0)?
                .with_theta_grid(db_grid(-20.0, 20.0, 41))?;
            let closed = outage_own_lane_ppp(&s)?;
            let integral = outage_own_lane_ppp_integral(lane.lambda(), &s)?;
            for (a, b) in closed.p_out().iter().zip(integral.p_out()) {
                worst = worst.max((a - b).abs());
            }
        }
        let s = LinkScenario::new(lane, 3.0, 0.5, 0.01, PI / 20.0)?;
        let closed = outage_own_lane_ppp(&s)?;
        let sim = simulate(config, McScope::OwnLane, McSource::Model, &s)?;
        let ks = ks_distance(&closed, &sim)?;
        let other = LinkScenario {
            own_lane: HardcoreLaneModel::ppp(0.1)?,
            ..s.clone()
        };
        let invariant = outage_own_lane_ppp(&other)?.p_out() == closed.p_out()
            && outage_multilane_ppp(&other)?.p_out() == outage_multilane_ppp(&s)?.p_out();
        Ok(Outcome {
            passed: worst <= PPP_INTEGRAL_TOL && ks <= PPP_MC_KS && invariant,
            details: format!(
                "max |closed - integral| = {worst:.2e} (≤ {PPP_INTEGRAL_TOL:.0e}), KS vs MC = {ks:.4} (≤ {PPP_MC_KS}), intensity invariance {}",
                if invariant { "exact" } else { "broken" }
            ),
        })
    })
}

/// Own-lane hardcore outage against simulation, and against the Poisson
/// prediction.
pub fn criterion_4(config: &ReplicationConfig) -> CriterionOutcome {
    timed(
        4,
        "own-lane hardcore outage",
        Some(Duration::from_secs(300)),
        config,
        || {
            let s = reference_scenario()?;
            let hc = outage_own_lane_hc(&s.own_lane, &s)?;
            let ppp = outage_own_lane_ppp(&s)?;
            let sim = simulate(config, McScope::OwnLane, McSource::Model, &s)?;
            let ks_hc = ks_distance(&hc, &sim)?;
            let ks_ppp = ks_distance(&ppp, &sim)?;
            Ok(Outcome {
            passed: ks_hc <= OWN_LANE_KS && ks_hc < ks_ppp,
            details: format!("KS(hardcore, MC) = {ks_hc:.4} (≤ {OWN_LANE_KS}), KS(Poisson, MC) = {ks_ppp:.4}"),
        })
        },
    )
}

/// Outage from one other lane beyond the guard zone.
pub fn criterion_5(config: &ReplicationConfig) -> CriterionOutcome {
    timed(5, "other-lane outage", None, config, || {
        let base = reference_scenario()?;
        let r0 = guard_zone(6.0, base.phi)?;
        let hc_scenario = base.clone().with_other_lane(base.own_lane, 6.0)?;
        let hc = outage_other_lane_hc(&base.own_lane, &hc_scenario, r0)?;
        let hc_sim = simulate(config, McScope::OtherLanes, McSource::Model, &hc_scenario)?;
        let ks_hc = ks_distance(&hc, &hc_sim)?;

        let ppp_lane = HardcoreLaneModel::ppp(0.025)?;
        let ppp_scenario = LinkScenario {
            own_lane: ppp_lane,
            ..base
        }
        .with_other_lane(ppp_lane, 6.0)?;
        let ppp = outage_other_lane_ppp(ppp_lane.lambda(), &ppp_scenario, r0)?;
        let ppp_sim = simulate(config, McScope::OtherLanes, McSource::Model, &ppp_scenario)?;
        let ks_ppp = ks_distance(&ppp, &ppp_sim)?;
        Ok(Outcome {
            passed: ks_hc <= OTHER_LANE_HC_KS && ks_ppp <= OTHER_LANE_PPP_KS,
            details: format!(
                "r0 = {r0:.1} m; KS(hardcore, MC) = {ks_hc:.4} (≤ {OTHER_LANE_HC_KS}), KS(Poisson, Poisson MC) = {ks_ppp:.4} (≤ {OTHER_LANE_PPP_KS})"
            ),
        })
    })
}

/// Three-lane synthetic trace: fit, predict and simulate from the trace.
pub fn criterion_6(config: &ReplicationConfig) -> CriterionOutcome {
    timed(
        6,
        "multi-lane end to end",
        Some(Duration::from_secs(600)),
        config,
        || {
            let truth = [(0.0248, 7.10), (0.0218, 11.05), (0.0205, 14.82)]
                .iter()
                .map(|&(l, c)| HardcoreLaneModel::from_intensity(l, c))
                .collect::<Result<Vec<_>, _>>()?;
            let extent = Extent::new(0.0, 10_000.0)?;
            let trace = generate_synthetic_trace(&truth, 100, extent, config.seed)?;
            let snaps = trace.snapshot_ids();
            let samples = trace
                .lane_ids()
                .into_iter()
                .map(|lane| pooled_gaps(&trace, &snaps, lane, None))
                .collect::<Result<Vec<_>, _>>()?;
            let lsq: Vec<FitResult> = samples
                .iter()
                .map(|s| fit_lsq(s, None, false))
                .collect::<Result<_, _>>()?;
            let ppp: Vec<FitResult> = samples.iter().map(fit_ppp_mle).collect();

            let template = LinkScenario::new(truth[1], 3.0, 0.5, 0.01, PI / 20.0)?;
            let hc_scenario = LinkScenario::from_fits(&lsq, 2, 4.0, &template)?;
            let ppp_scenario = LinkScenario::from_fits(&ppp, 2, 4.0, &template)?;
            let hc = outage_multilane_hc(&hc_scenario)?;
            let pp = outage_multilane_ppp(&ppp_scenario)?;
            let ecdfs = samples
                .iter()
                .map(empirical_cdf)
                .collect::<Result<Vec<_>, _>>()?;
            let source = McSource::Trace {
                own: ecdfs[1].clone(),
                others: vec![ecdfs[0].clone(), ecdfs[2].clone()],
            };
            let sim = simulate(config, McScope::AllLanes, source, &hc_scenario)?;
            let ks_hc = ks_distance(&hc, &sim)?;
            let ks_ppp = ks_distance(&pp, &sim)?;

            let steeper = LinkScenario {
                eta: 4.0,
                ..hc_scenario
            };
            let hc4 = outage_multilane_hc(&steeper)?;
            let decreases = hc4.p_out().iter().zip(hc.p_out()).all(|(a, b)| a <= b);

            let fitted: Vec<String> = lsq
                .iter()
                .map(|f| format!("({:.4}, {:.2})", f.lambda_hat, f.c_hat.unwrap_or(0.0)))
                .collect();
            Ok(Outcome {
            passed: ks_hc <= MULTILANE_KS && ks_hc < ks_ppp && decreases,
            details: format!(
                "fits {}; KS(hardcore, MC) = {ks_hc:.4} (≤ {MULTILANE_KS}), KS(Poisson, MC) = {ks_ppp:.4}; outage {} when η goes 3 → 4",
                fitted.join(" "),
                if decreases { "decreases" } else { "does not decrease" }
            ),
        })
        },
    )
}

/// Estimator recovery on short synthetic lanes.
pub fn criterion_7(config: &ReplicationConfig) -> CriterionOutcome {
    timed(7, "estimator recovery", None, config, || {
        let (lambda, c) = (0.025, 12.0);
        let model = HardcoreLaneModel::from_intensity(lambda, c)?;
        let lane_sample =
            |length: f64, model: &HardcoreLaneModel, i: u64| -> Result<GapSample, Error> {
                let extent = Extent::new(0.0, length)?;
                let snap = sample_hardcore_lane_with(
                    model,
                    extent,
                    0,
                    &mut RngSeed::new(config.seed, i).rng(),
                )?;
                Ok(GapSample::new(snap.gaps(), 0)?)
            };
        let mut lsq_ok = 0;
        let mut mle_upward = true;
        let mut excess_short = 0.0;
        for i in 0..100 {
            let s = lane_sample(10_000.0, &model, i)?;
            let f = fit_lsq(&s, None, false)?;
            if rel_err(f.c_hat.unwrap_or(0.0), c) <= LSQ_C_REL_TOL
                && rel_err(f.lambda_hat, lambda) <= LSQ_LAMBDA_REL_TOL
            {
                lsq_ok += 1;
            }
            let m = fit_hc_mle(&s)?;
            let c_mle = m.c_hat.unwrap_or(0.0);
            mle_upward &= c_mle >= c;
            excess_short += (c_mle - c) / 100.0;
        }
        let mut excess_long = 0.0;
        for i in 0..100 {
            let s = lane_sample(100_000.0, &model, 1000 + i)?;
            excess_long += (fit_hc_mle(&s)?.c_hat.unwrap_or(0.0) - c) / 100.0;
        }
        let mle_consistent = mle_upward && excess_long < excess_short;

        let poisson = HardcoreLaneModel::ppp(lambda)?;
        let mut flagged = 0;
        let mut mom_sound = true;
        for i in 0..100 {
            let s = lane_sample(10_000.0, &poisson, 2000 + i)?;
            let f = fit_mom(&s)?;
            if f.clamped {
                flagged += 1;
                mom_sound &= f.c_hat == Some(0.0) && f.c_raw.is_some_and(|r| r < 0.0);
            }
        }
        Ok(Outcome {
            passed: lsq_ok >= LSQ_MIN_SUCCESSES && mle_consistent && mom_sound && flagged > 0,
            details: format!(
                "LSQ within tolerance in {lsq_ok}/100 lanes (need {LSQ_MIN_SUCCESSES}); HC-MLE ĉ - c mean {excess_short:.3} m at n≈250, {excess_long:.4} m at n≈2500, never below c: {mle_upward}; MoM clamped {flagged}/100 Poisson lanes cleanly: {mom_sound}"
            ),
        })
    })
}

/// Special functions against quadrature of their integral representations.
pub fn criterion_8(config: &ReplicationConfig) -> CriterionOutcome {
    timed(8, "special functions", None, config, || {
        let quad = Integrator::with_tolerances(1e-13, 0.0);
        let mut gamma_err: f64 = 0.0;
        for k in 1..=30u32 {
            let ln_norm = ln_factorial(k as u64 - 1);
            for i in 0..=50 {
                let x = i as f64;
                let density = |t: f64| {
                    if t <= 0.0 {
                        if k == 1 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        ((k - 1) as f64 * t.ln() - t - ln_norm).exp()
                    }
                };
                let oracle = quad.integrate_semi_infinite(density, x, k as f64)?.value;
                gamma_err = gamma_err.max((regularized_upper_gamma(k, x)? - oracle).abs());
            }
        }

        // 2F1(1, b; 1+b; -z) = ∫_0^1 du / (1 + z u^{1/b})
        let euler = |b: f64, z: f64| -> Result<f64, Error> {
            Ok(quad
                .integrate(|u| 1.0 / (1.0 + z * u.powf(1.0 / b)), 0.0, 1.0)?
                .value)
        };
        let mut args = vec![0.0];
        args.extend((0..=56).map(|i| 10f64.powf(-3.0 + i as f64 / 8.0)));
        let mut hyp_err: f64 = 0.0;
        for eta in [1.5, 2.0, 3.0, 4.0, 6.0] {
            for &z in &args {
                hyp_err = hyp_err.max((hyp2f1_outage(eta, z)? - euler(1.0 - 1.0 / eta, z)?).abs());
                hyp_err = hyp_err.max((hyp2f1_guardzone(eta, z)? - euler(1.0 / eta, z)?).abs());
            }
        }
        let arctan = (hyp2f1_outage(2.0, 1.0)? - PI / 4.0)
            .abs()
            .max((hyp2f1_guardzone(2.0, 1.0)? - PI / 4.0).abs());
        Ok(Outcome {
            passed: gamma_err <= GAMMA_TOL && hyp_err <= HYP2F1_TOL && arctan <= HYP2F1_TOL,
            details: format!(
                "max |Q - oracle| = {gamma_err:.1e} (≤ {GAMMA_TOL:.0e}), max |2F1 - oracle| = {hyp_err:.1e} (≤ {HYP2F1_TOL:.0e}), |2F1(1,1/2;3/2;-1) - π/4| = {arctan:.1e}"
            ),
        })
    })
}

/// Structural properties that must hold for every input.
pub fn criterion_9(config: &ReplicationConfig) -> CriterionOutcome {
    timed(9, "structural invariants", None, config, || {
        let mut failures = Vec::new();

        let base = reference_scenario()?
            .with_other_lane(HardcoreLaneModel::from_intensity(0.02, 10.0)?, 4.0)?;
        let r0 = base.guard_distances()?[0];
        let curves = [
            outage_own_lane_hc(&base.own_lane, &base)?,
            outage_own_lane_ppp(&base)?,
            outage_other_lane_hc(&base.other_lanes[0].model, &base, r0)?,
            outage_other_lane_ppp(0.02, &base, r0)?,
            outage_multilane_hc(&base)?,
            outage_multilane_ppp(&base)?,
        ];
        if !curves
            .iter()
            .all(|c| c.is_nondecreasing() && c.p_out().iter().all(|p| (0.0..=1.0).contains(p)))
        {
            failures.push(String::from("outage curve not monotone or out of [0, 1]"));
        }

        let mut summaries_ok = true;
        for (lambda, c) in [(0.025, 16.0), (0.01, 50.0), (0.1, 2.0), (0.05, 19.0)] {
            let m = HardcoreLaneModel::from_intensity(lambda, c)?;
            for i in 0..=400 {
                let r = i as f64 * 0.5;
                let j = m.j_function(r);
                summaries_ok &= j.is_nan() || j >= 1.0 - 1e-12;
                summaries_ok &= m.l_function(r) <= r + 1e-12;
            }
        }
        if !summaries_ok {
            failures.push(String::from("J below 1 or L above r"));
        }

        let mut round_trip: f64 = 0.0;
        for (mean, variance, skewness) in [(1.12e-6, 1e-13, 1.5), (3.0, 0.5, 1.0), (10.0, 4.0, 0.9)]
        {
            let m = MomentTriple {
                mean,
                variance,
                skewness,
            };
            let back = shifted_gamma_from_moments(m)?.moments();
            round_trip = round_trip
                .max(rel_err(back.mean, mean))
                .max(rel_err(back.variance, variance))
                .max(rel_err(back.skewness, skewness));
        }
        if round_trip > 1e-12 {
            failures.push(format!("shifted-gamma round trip error {round_trip:.1e}"));
        }

        let small = McConfig {
            n_runs: 2000,
            seed: config.seed,
            ..McConfig::default()
        }
        .with_sufficient_roadway(&base)?;
        let sim_a = simulate_outage(&small, &base)?.to_csv();
        let sim_b = simulate_outage(&small, &base)?.to_csv();
        let extent = Extent::new(0.0, 2000.0)?;
        let models = [base.own_lane, base.other_lanes[0].model];
        let trace_a = generate_synthetic_trace(&models, 5, extent, config.seed)?.to_csv();
        let trace_b = generate_synthetic_trace(&models, 5, extent, config.seed)?.to_csv();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64).collect();
        let env = |seed| {
            simulate_envelope(
                SummaryKind::J,
                &base.own_lane,
                extent,
                40.0,
                &grid,
                20,
                seed,
            )
        };
        let env_same = env(config.seed)?.to_csv() == env(config.seed)?.to_csv();
        if sim_a != sim_b || trace_a != trace_b || !env_same {
            failures.push(String::from("seeded output not reproducible"));
        }

        Ok(Outcome {
            passed: failures.is_empty(),
            details: if failures.is_empty() {
                format!(
                    "{} outage curves monotone in [0, 1]; J ≥ 1, L ≤ r; round trip error {round_trip:.1e}; seeded outputs byte-identical",
                    curves.len()
                )
            } else {
                failures.join("; ")
            },
        })
    })
}

/// Runs every criterion in order.
pub fn run_all(config: &ReplicationConfig) -> Vec<CriterionOutcome> {
    ALL.iter().map(|f| f(config)).collect()
}

pub const ALL: [fn(&ReplicationConfig) -> CriterionOutcome; 9] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass_and_report() {
        let config = ReplicationConfig::default();
        for outcome in [criterion_8(&config), criterion_9(&config)] {
            assert!(outcome.passed, "{outcome}");
            assert!(outcome.to_string().starts_with("PASS criterion"));
        }
    }

    #[test]
    fn errors_become_failures() {
        let o = timed(0, "broken", None, &ReplicationConfig::default(), || {
            Err(HardcoreLaneModel::from_intensity(-1.0, 0.0)
                .unwrap_err()
                .into())
        });
        assert!(!o.passed);
        assert!(o.details.starts_with("error:"));
    }
}
