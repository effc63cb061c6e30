//! `vanet-hc`: synthetic traces, fitting, summary statistics, outage
//! prediction and Monte-Carlo validation from the command line.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 when a numerical routine
//! fails to converge.

mod commands;
mod error;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "vanet-hc",
    version,
    about = "Hardcore lane models for vehicular network outage analysis"
)]
struct Cli {
    /// Directory that receives every output file.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic multi-lane trace with known parameters.
    GenTraces(GenTracesArgs),
    /// Fit lane models to the gaps of a trace.
    Fit(FitArgs),
    /// Summary statistics of a trace, or closed forms of a model.
    Stats(StatsArgs),
    /// Analytic outage curves, hardcore and Poisson.
    Outage(OutageArgs),
    /// Monte-Carlo outage curve.
    Simulate(SimulateArgs),
    /// Kolmogorov-Smirnov distance between two curve files.
    Gof(GofArgs),
    /// Run the full validation suite and write a report.
    ReplicatePaper(ReplicateArgs),
}

#[derive(Debug, Args)]
struct GenTracesArgs {
    /// Lane parameters as `λ:c,λ:c,...` (per meter, meters).
    #[arg(long)]
    lanes: String,
    #[arg(long, default_value_t = 1200)]
    snapshots: usize,
    #[arg(long, default_value_t = 10.0)]
    length_km: f64,
    /// File stem of the trace; the sidecar is `<name>.meta.json`.
    #[arg(long, default_value = "trace")]
    name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Ppp,
    Mom,
    Mle,
    Lsq,
    LsqFixed,
}

#[derive(Debug, Args)]
struct TraceSelection {
    /// Use only this snapshot instead of pooling all of them.
    #[arg(long)]
    snapshot: Option<u64>,
    /// Snapshots skipped at the start of the trace (warm-up).
    #[arg(long, default_value_t = 600)]
    drop_first: usize,
    /// Distance excluded at both ends of the observed road.
    #[arg(long, default_value_t = 0.0)]
    window_margin: f64,
}

#[derive(Debug, Args)]
struct FitArgs {
    trace: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Lsq)]
    method: Method,
    /// Fit only this lane.
    #[arg(long)]
    lane: Option<u32>,
    #[command(flatten)]
    selection: TraceSelection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    J,
    K,
    L,
    G,
    F,
    Pcf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Trace to estimate from.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    trace: Option<PathBuf>,
    /// Model `λ:c` for closed forms.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_enum, default_value_t = Kind::J)]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    lane: u32,
    /// Largest distance evaluated; defaults depend on the statistic.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// With a model: realizations simulated for an envelope.
    #[arg(long, default_value_t = 0)]
    envelope_runs: usize,
    /// Road length of simulated realizations.
    #[arg(long, default_value_t = 10.0)]
    length_km: f64,
    #[arg(long, default_value_t = 600)]
    drop_first: usize,
}

#[derive(Debug, Args)]
struct RadioArgs {
    #[arg(long, default_value_t = 3.0)]
    eta: f64,
    #[arg(long, default_value_t = 0.5)]
    xi: f64,
    #[arg(long, default_value_t = 0.01)]
    g: f64,
    /// Lateral spacing between adjacent lanes, meters.
    #[arg(long, default_value_t = 4.0)]
    ell: f64,
    /// Antenna beamwidth, radians.
    #[arg(long, default_value_t = PI / 20.0)]
    phi: f64,
    /// Threshold grid `lo:hi:n` in dB.
    #[arg(long, default_value = "-10:20:61", allow_hyphen_values = true)]
    theta_db: String,
    /// Lane of the link, counting from 1.
    #[arg(long, default_value_t = 1)]
    link_lane: u32,
}

#[derive(Debug, Args)]
struct OutageArgs {
    /// Lane models `λ:c,...`, lane 1 first.
    #[arg(long, conflicts_with = "fits", required_unless_present = "fits")]
    lanes: Option<String>,
    /// Fit table written by `fit`.
    #[arg(long)]
    fits: Option<PathBuf>,
    #[command(flatten)]
    radio: RadioArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scope {
    Own,
    Other,
    All,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Lane models `λ:c,...`, lane 1 first.
    #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
    lanes: Option<String>,
    /// Trace whose pooled gap distributions drive the simulation.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 600)]
    drop_first: usize,
    #[command(flatten)]
    radio: RadioArgs,
    #[arg(long, default_value_t = 100_000)]
    runs: usize,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Scope::All)]
    scope: Scope,
    /// Simulated road length; by default the shortest that keeps the cut-off
    /// interference negligible.
    #[arg(long)]
    length_km: Option<f64>,
}

#[derive(Debug, Args)]
struct GofArgs {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Debug, Args)]
struct ReplicateArgs {
    /// Tenfold smaller experiments, without runtime limits.
    #[arg(long)]
    quick: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = output::Context {
        out_dir: cli.out_dir,
        format: cli.format,
        seed: cli.seed,
    };
    match cli.command {
        Command::GenTraces(a) => commands::gen_traces(&ctx, a),
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::Stats(a) => commands::stats(&ctx, a),
        Command::Outage(a) => commands::outage(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Gof(a) => commands::gof(a),
        Command::ReplicatePaper(a) => commands::replicate(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
