//! `eddylab`: batch front-end for homogenization, core, exit-time and
//! transport experiments.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical refusal,
//! 3 internal consistency failure.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use commands::{CliError, Outcome};
use config::{load, Format, Outputs};
use output::Sink;

/// Variable naming the default output directory.
const OUT_ENV: &str = "EDDYLAB_OUT";

#[derive(Parser, Debug)]
#[command(name = "eddylab", version, about = "Multiscale eddy conductivity and super-diffusion laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Effective conductivity of a single periodic eddy.
    Homogenize,
    /// Renormalization-core trajectory, diagnostics and regime.
    Core,
    /// Mean exit time from a disk or square.
    ExitPde,
    /// Monte Carlo exit and separation times.
    Simulate,
    /// Vanishing-conductivity curves V and W.
    Vcurve,
    /// Checks a flow against the model hypotheses.
    Validate,
    /// Direct versus reiterated two-scale conductivity.
    TwoScale,
    /// Sensitivity of two-scale conductivity to a relative shift.
    Sensitivity,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Homogenize => "homogenize",
            Command::Core => "core",
            Command::ExitPde => "exit-pde",
            Command::Simulate => "simulate",
            Command::Vcurve => "vcurve",
            Command::Validate => "validate",
            Command::TwoScale => "two-scale",
            Command::Sensitivity => "sensitivity",
        }
    }
}

fn sink_for<C: Outputs>(cli: &Cli, cfg: &C) -> Result<Sink, CliError> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out().map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = cli.format.or(cfg.format()).unwrap_or(Format::Both);
    Ok(Sink::new(dir, format)?)
}

fn run_with<C, F>(cli: &Cli, path: &Path, adjust: impl FnOnce(&mut C), f: F) -> Result<(u8, Sink), CliError>
where
    C: DeserializeOwned + Serialize + Outputs,
    F: FnOnce(&C, &mut Sink) -> Outcome,
{
    let mut cfg: C = load(path).map_err(CliError::Usage)?;
    adjust(&mut cfg);
    let mut sink = sink_for(cli, &cfg)?;
    let code = f(&cfg, &mut sink)?;
    Ok((code, sink))
}

fn dispatch(cli: &Cli, path: &Path) -> Result<(u8, Sink), CliError> {
    let seed = cli.seed;
    match cli.command {
        Command::Homogenize => run_with(cli, path, |_: &mut config::HomogenizeConfig| {}, commands::homogenize),
        Command::Core => run_with(cli, path, |_: &mut config::CoreConfig| {}, commands::core),
        Command::ExitPde => run_with(cli, path, |_: &mut config::ExitPdeConfig| {}, commands::exit_pde),
        Command::Simulate => run_with(
            cli,
            path,
            |c: &mut config::SimulateConfig| {
                if let Some(s) = seed {
                    c.sim.seed = s;
                }
            },
            commands::simulate,
        ),
        Command::Vcurve => run_with(cli, path, |_: &mut config::VCurveConfig| {}, commands::vcurve),
        Command::Validate => run_with(cli, path, |_: &mut config::ValidateConfig| {}, commands::validate),
        Command::TwoScale => run_with(cli, path, |_: &mut config::TwoScaleConfig| {}, commands::two_scale),
        Command::Sensitivity => run_with(cli, path, |_: &mut config::SensitivityConfig| {}, commands::sensitivity),
    }
}

fn write_meta(sink: &mut Sink, command: &str, started: SystemTime, elapsed: f64, code: u8) {
    let since = started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let files: Vec<String> = sink.written().iter().map(|p| p.display().to_string()).collect();
    let meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix": since,
        "elapsed_seconds": elapsed,
        "threads": rayon::current_num_threads(),
        "exit_code": code,
        "files": files,
    });
    if let Err(e) = sink.json_always(&format!("{}.meta.json", command.replace('-', "_")), &meta) {
        eprintln!("eddylab: cannot write metadata: {e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("eddylab: cannot configure {t} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let Some(path) = cli.config.clone() else {
        eprintln!("eddylab: --config PATH is required");
        return ExitCode::from(1);
    };
    let started = SystemTime::now();
    let clock = Instant::now();
    match dispatch(&cli, &path) {
        Ok((code, mut sink)) => {
            write_meta(&mut sink, cli.command.name(), started, clock.elapsed().as_secs_f64(), code);
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("eddylab {}: {e}", cli.command.name());
            ExitCode::from(e.code())
        }
    }
}
