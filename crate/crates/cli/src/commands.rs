use std::path::Path;

use vanet_hardcore::curves::{distance_grid, SummaryKind};
use vanet_hardcore::fitting::{self, FitMethod, FitResult};
use vanet_hardcore::flags::{parse_db_range, parse_lane_params};
use vanet_hardcore::model::HardcoreLaneModel;
use vanet_hardcore::montecarlo::{simulate_outage, McConfig, McScope, McSource};
use vanet_hardcore::outage::{self, LinkScenario};
use vanet_hardcore::replication::{self, ReplicationConfig};
use vanet_hardcore::sampling::Extent;
use vanet_hardcore::stats::{self, Window, DEFAULT_PROBES};
use vanet_hardcore::traces::{self, TraceFile};

use crate::error::CliError;
use crate::output::{read_curve, read_fits, to_json, AnyCurve, Context};
use crate::{
    FitArgs, Format, GenTracesArgs, GofArgs, Kind, Method, OutageArgs, RadioArgs, ReplicateArgs,
    Scope, SimulateArgs, StatsArgs,
};

fn input(message: impl Into<String>) -> CliError {
    CliError::Input(message.into())
}

fn road_extent(length_km: f64) -> Result<Extent, CliError> {
    if !(length_km > 0.0 && length_km.is_finite()) {
        return Err(input(format!(
            "road length must be positive, got {length_km} km"
        )));
    }
    Ok(Extent::new(0.0, 1000.0 * length_km)?)
}

pub fn gen_traces(ctx: &Context, a: GenTracesArgs) -> Result<(), CliError> {
    let models = parse_lane_params(&a.lanes)?;
    if a.snapshots == 0 {
        return Err(input("at least one snapshot is required"));
    }
    let trace = traces::generate_synthetic_trace(
        &models,
        a.snapshots,
        road_extent(a.length_km)?,
        ctx.seed,
    )?;
    std::fs::create_dir_all(&ctx.out_dir).map_err(|source| CliError::Io {
        path: ctx.out_dir.clone(),
        source,
    })?;
    let path = ctx.out_dir.join(format!("{}.csv", a.name));
    trace.write(&path)?;
    println!(
        "wrote {} positions ({} snapshots, {} lanes, seed {}) to {}",
        trace.n_rows(),
        a.snapshots,
        models.len(),
        ctx.seed,
        path.display()
    );
    Ok(())
}

/// The trace without its warm-up snapshots; an error if nothing is left.
fn load_trace(path: &Path, drop_first: usize) -> Result<TraceFile, CliError> {
    let trace = traces::parse_trace(path)?;
    let kept = trace.drop_first(drop_first);
    if kept.snapshot_ids().is_empty() {
        return Err(input(format!(
            "{} has {} snapshots, all removed by --drop-first {drop_first}",
            path.display(),
            trace.snapshot_ids().len()
        )));
    }
    Ok(kept)
}

fn method(m: Method) -> FitMethod {
    match m {
        Method::Ppp => FitMethod::PppMle,
        Method::Mom => FitMethod::Mom,
        Method::Mle => FitMethod::HcMle,
        Method::Lsq => FitMethod::Lsq2,
        Method::LsqFixed => FitMethod::Lsq1FixedIntensity,
    }
}

pub fn fit(ctx: &Context, a: FitArgs) -> Result<(), CliError> {
    let sel = &a.selection;
    let trace = match sel.snapshot {
        Some(_) => traces::parse_trace(&a.trace)?,
        None => load_trace(&a.trace, sel.drop_first)?,
    };
    let window = if sel.window_margin > 0.0 {
        Some(Window::with_margin(
            trace.metadata.extent()?,
            sel.window_margin,
        )?)
    } else {
        None
    };
    let lanes = match a.lane {
        Some(l) if trace.lane_ids().contains(&l) => vec![l],
        Some(l) => return Err(input(format!("lane {l} is not in the trace"))),
        None => trace.lane_ids(),
    };
    let snapshots = match sel.snapshot {
        Some(s) => vec![s],
        None => trace.snapshot_ids(),
    };
    let mut fits = Vec::new();
    for lane in lanes {
        let sample = traces::pooled_gaps(&trace, &snapshots, lane, window.as_ref())?;
        let f = fitting::fit(method(a.method), &sample)?;
        let truth = trace
            .metadata
            .ground_truth
            .iter()
            .flatten()
            .find(|t| t.lane_id == lane)
            .map(|t| format!(" (ground truth λ = {:.5}, c = {:.3})", t.lambda, t.c))
            .unwrap_or_default();
        println!(
            "lane {lane}: λ̂ = {:.5} /m, ĉ = {} m from {} gaps{}{truth}",
            f.lambda_hat,
            f.c_hat.map_or(String::from("-"), |c| format!("{c:.3}")),
            sample.len(),
            if f.clamped { " [clamped]" } else { "" }
        );
        fits.push(f);
    }
    let path = ctx.write_fits(&fits)?;
    println!("fits written to {}", path.display());
    Ok(())
}

fn summary_kind(k: Kind) -> SummaryKind {
    match k {
        Kind::J => SummaryKind::J,
        Kind::K => SummaryKind::K,
        Kind::L => SummaryKind::L,
        Kind::G => SummaryKind::G,
        Kind::F => SummaryKind::F,
        Kind::Pcf => SummaryKind::Pcf,
    }
}

pub fn stats(ctx: &Context, a: StatsArgs) -> Result<(), CliError> {
    let kind = summary_kind(a.kind);
    let grid = match a.r_max {
        Some(r_max) => {
            if !(r_max > 0.0 && a.step > 0.0 && r_max / a.step <= 1e6) {
                return Err(input(
                    "--r-max and --step must be positive with at most 10⁶ steps",
                ));
            }
            distance_grid(r_max, a.step)
        }
        None => stats::default_grid(kind),
    };
    let r_max = grid[grid.len() - 1];
    let stem = kind.label().to_lowercase();

    if let Some(model) = &a.model {
        let model = single_model(model)?;
        let curve = model.summary_curve(kind, &grid)?;
        let path = ctx.write_summary(&format!("{stem}_analytic"), &curve)?;
        println!(
            "closed-form {} of λ = {}, c = {} written to {}",
            kind.label(),
            model.lambda(),
            model.c(),
            path.display()
        );
        if a.envelope_runs > 0 {
            if kind == SummaryKind::Pcf {
                return Err(input("no estimator for the pair correlation function; envelopes need J, K, L, G or F"));
            }
            let env = stats::simulate_envelope(
                kind,
                &model,
                road_extent(a.length_km)?,
                r_max,
                &grid,
                a.envelope_runs,
                ctx.seed,
            )?;
            let path = ctx.write_envelope(&format!("{stem}_envelope"), &env)?;
            println!(
                "envelope over {} simulated realizations (seed {}) written to {}; closed form inside: {}",
                a.envelope_runs,
                ctx.seed,
                path.display(),
                env.contains(&grid, curve.values())
            );
        }
        return Ok(());
    }

    let path = a
        .trace
        .as_deref()
        .ok_or_else(|| input("either --trace or --model is required"))?;
    if kind == SummaryKind::Pcf {
        return Err(input(
            "no estimator for the pair correlation function; use J, K, L, G or F",
        ));
    }
    let trace = load_trace(path, a.drop_first)?;
    let snapshots: Vec<_> = trace
        .snapshot_ids()
        .into_iter()
        .filter_map(|s| trace.get(s, a.lane).cloned())
        .collect();
    if snapshots.is_empty() {
        return Err(input(format!("lane {} is not in the trace", a.lane)));
    }
    let curves = snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let window = Window::inner(s.extent(), r_max, r_max)?;
            stats::statistic(
                kind,
                s,
                &window,
                &grid,
                DEFAULT_PROBES,
                vanet_hardcore::RngSeed::new(ctx.seed, i as u64),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean = stats::mean_curve(&curves)?;
    let env = stats::envelope_from_curves(&curves)?;
    let p1 = ctx.write_summary(&format!("{stem}_empirical"), &mean)?;
    let p2 = ctx.write_envelope(&format!("{stem}_envelope"), &env)?;
    println!(
        "{} of lane {} over {} snapshots: mean written to {}, envelope to {}",
        kind.label(),
        a.lane,
        snapshots.len(),
        p1.display(),
        p2.display()
    );
    Ok(())
}

fn single_model(text: &str) -> Result<HardcoreLaneModel, CliError> {
    let models = parse_lane_params(text)?;
    match models.as_slice() {
        [m] => Ok(*m),
        _ => Err(input(format!(
            "expected a single `λ:c` pair, got {}",
            models.len()
        ))),
    }
}

fn template(own: HardcoreLaneModel, radio: &RadioArgs) -> Result<LinkScenario, CliError> {
    let theta = parse_db_range(&radio.theta_db)?;
    Ok(LinkScenario::new(own, radio.eta, radio.xi, radio.g, radio.phi)?.with_theta_grid(theta)?)
}

/// Scenario with lane `link_lane` of `models` as the own lane and every
/// other lane `ell` meters per lane index away.
fn scenario_from_models(
    models: &[HardcoreLaneModel],
    radio: &RadioArgs,
) -> Result<LinkScenario, CliError> {
    let link = radio.link_lane as usize;
    if link == 0 || link > models.len() {
        return Err(input(format!(
            "--link-lane {link} outside 1..={}",
            models.len()
        )));
    }
    let mut s = template(models[link - 1], radio)?;
    for (j, m) in models.iter().enumerate() {
        if j + 1 != link {
            let ell = radio.ell * (j as f64 + 1.0 - link as f64).abs();
            s = s.with_other_lane(*m, ell)?;
        }
    }
    Ok(s)
}

fn scenario_from_fits(fits: &[FitResult], radio: &RadioArgs) -> Result<LinkScenario, CliError> {
    let own = fits
        .iter()
        .find(|f| f.lane_id == radio.link_lane)
        .ok_or_else(|| input(format!("no fit for link lane {}", radio.link_lane)))?;
    let t = template(own.to_model()?, radio)?;
    Ok(LinkScenario::from_fits(
        fits,
        radio.link_lane,
        radio.ell,
        &t,
    )?)
}

pub fn outage(ctx: &Context, a: OutageArgs) -> Result<(), CliError> {
    let scenario = match (&a.lanes, &a.fits) {
        (Some(lanes), _) => scenario_from_models(&parse_lane_params(lanes)?, &a.radio)?,
        (None, Some(path)) => scenario_from_fits(&read_fits(path)?, &a.radio)?,
        (None, None) => return Err(input("either --lanes or --fits is required")),
    };
    let hc = outage::outage_multilane_hc(&scenario)?;
    let ppp = outage::outage_multilane_ppp(&scenario)?;
    let p1 = ctx.write_outage("outage_hc", &hc)?;
    let p2 = ctx.write_outage("outage_ppp", &ppp)?;
    println!(
        "outage over {} thresholds with {} other lane(s): hardcore to {}, Poisson to {}",
        scenario.theta_grid.len(),
        scenario.other_lanes.len(),
        p1.display(),
        p2.display()
    );
    Ok(())
}

pub fn simulate(ctx: &Context, a: SimulateArgs) -> Result<(), CliError> {
    let (scenario, source) = match (&a.lanes, &a.trace) {
        (Some(lanes), _) => (
            scenario_from_models(&parse_lane_params(lanes)?, &a.radio)?,
            McSource::Model,
        ),
        (None, Some(path)) => trace_source(path, a.drop_first, &a.radio)?,
        (None, None) => return Err(input("either --lanes or --trace is required")),
    };
    let scope = match a.scope {
        Scope::Own => McScope::OwnLane,
        Scope::Other => McScope::OtherLanes,
        Scope::All => McScope::AllLanes,
    };
    if a.jobs == Some(0) {
        return Err(input("--jobs must be at least 1"));
    }
    let config = McConfig {
        n_runs: a.runs,
        seed: ctx.seed,
        source,
        scope,
        jobs: a.jobs,
        ..McConfig::default()
    };
    let config = match a.length_km {
        Some(km) => McConfig {
            roadway_length: road_extent(km)?.length(),
            ..config
        },
        None => config.with_sufficient_roadway(&scenario)?,
    };
    let curve = simulate_outage(&config, &scenario)?;
    let manifest = config.manifest(&scenario);
    let path = ctx.write_outage("outage_mc", &curve)?;
    ctx.write("manifest.json", &to_json(&manifest)?)?;
    println!(
        "{} runs on {:.1} km (seed {}, scenario {}) written to {}",
        a.runs,
        config.roadway_length / 1000.0,
        ctx.seed,
        &manifest.scenario_hash[..12],
        path.display()
    );
    Ok(())
}

/// Scenario from least-squares fits of every lane of a trace, with the
/// pooled gap distributions as simulation source.
fn trace_source(
    path: &Path,
    drop_first: usize,
    radio: &RadioArgs,
) -> Result<(LinkScenario, McSource), CliError> {
    let trace = load_trace(path, drop_first)?;
    let snaps = trace.snapshot_ids();
    let mut fits = Vec::new();
    let mut laws = Vec::new();
    for lane in trace.lane_ids() {
        let sample = traces::pooled_gaps(&trace, &snaps, lane, None)?;
        fits.push(fitting::fit_lsq(&sample, None, false)?);
        laws.push((lane, traces::empirical_cdf(&sample)?));
    }
    let scenario = scenario_from_fits(&fits, radio)?;
    let mut own = None;
    let mut others = Vec::new();
    for (lane, law) in laws {
        if lane == radio.link_lane {
            own = Some(law);
        } else {
            others.push(law);
        }
    }
    let own = own.ok_or_else(|| input(format!("no lane {} in the trace", radio.link_lane)))?;
    Ok((scenario, McSource::Trace { own, others }))
}

pub fn gof(a: GofArgs) -> Result<(), CliError> {
    let ks = match (read_curve(&a.a)?, read_curve(&a.b)?) {
        (AnyCurve::Outage(x), AnyCurve::Outage(y)) => stats::ks_distance(&x, &y)?,
        (AnyCurve::Summary(x), AnyCurve::Summary(y)) => stats::ks_distance(&x, &y)?,
        (AnyCurve::Outage(x), AnyCurve::Summary(y)) => stats::ks_distance(&x, &y)?,
        (AnyCurve::Summary(x), AnyCurve::Outage(y)) => stats::ks_distance(&x, &y)?,
    };
    println!("ks_distance {ks}");
    Ok(())
}

pub fn replicate(ctx: &Context, a: ReplicateArgs) -> Result<(), CliError> {
    let config = if a.quick {
        ReplicationConfig {
            seed: ctx.seed,
            mc_runs: 10_000,
            realizations: 1_000,
            enforce_runtime: false,
        }
    } else {
        ReplicationConfig {
            seed: ctx.seed,
            ..ReplicationConfig::default()
        }
    };
    let mut outcomes = Vec::new();
    for criterion in replication::ALL {
        let o = criterion(&config);
        println!("{o}");
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let report = match ctx.format {
        Format::Json => to_json(&serde_json::json!({ "config": config, "criteria": outcomes }))?,
        Format::Csv => outcomes.iter().map(|o| format!("{o}\n")).collect(),
    };
    let name = match ctx.format {
        Format::Json => "replication_report.json",
        Format::Csv => "replication_report.txt",
    };
    let path = ctx.write(name, &report)?;
    println!(
        "{passed}/{} criteria passed; report written to {}",
        outcomes.len(),
        path.display()
    );
    Ok(())
}
