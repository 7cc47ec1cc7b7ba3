//! Experiment CLI: each subcommand runs one experiment, writes its sweep
//! CSVs plus `summary.json` under the output directory and prints one
//! PASS/FAIL line per gate. The process exits nonzero when a gate fails.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rcar_exp::config::{self, RawConfig};
use rcar_exp::experiments::{
    diagnostics, innovation, mse, posterior1d, projection, reversibility, Outcome,
};

#[derive(Parser)]
#[command(
    name = "rcar",
    about = "Function-space RCAR Metropolis-Hastings experiment suite",
    version = rcar_exp::report::build_describe(),
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config file ([chain]/[kernel]/[potential]/[semimetric]/[sweep]
    /// sections with key = value lines; unknown keys are an error).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every run is bit-reproducible given the seed.
    #[arg(long, default_value_t = 20240101)]
    seed: u64,
    /// Output directory for CSVs and summary.json.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Replica override (experiment-specific meaning).
    #[arg(long)]
    replicas: Option<usize>,
    /// Rayon worker threads (defaults to the core count).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One-step prior-stationarity KS test per mode, with negative control.
    #[command(after_help = defaults_help(&reversibility::Config::default().resolved()))]
    Reversibility(Common),
    /// 1-D invariant-measure TV distance against the quadrature oracle.
    #[command(after_help = defaults_help(&posterior1d::Config::default().resolved()))]
    Posterior1d(Common),
    /// Projection-perturbation sweep for pCN.
    #[command(name = "perturb-projection",
              after_help = defaults_help(&projection::Config::default().resolved()))]
    PerturbProjection(Common),
    /// Innovation-truncation sweep for the compound Poisson chain.
    #[command(name = "perturb-innovation",
              after_help = defaults_help(&innovation::Config::default().resolved()))]
    PerturbInnovation(Common),
    /// MSE and bias scaling of Cesàro averages in (n, eps).
    #[command(name = "mse-curve",
              after_help = defaults_help(&mse::Config::default().resolved()))]
    MseCurve(Common),
    /// Drift / contraction / small-set / weak-triangle diagnostics.
    #[command(after_help = defaults_help(&diagnostics::Config::default().resolved()))]
    Diagnostics(Common),
}

fn defaults_help(resolved: &std::collections::BTreeMap<String, String>) -> String {
    format!("Defaults:\n{}", config::format_resolved(resolved))
}

fn load_raw(common: &Common) -> Result<RawConfig> {
    Ok(match &common.config {
        Some(path) => config::load_config(path)?,
        None => RawConfig::default(),
    })
}

fn finish<T: Serialize>(outcome: Outcome<T>, common: &Common, name: &str) -> Result<bool> {
    let dir = common.out.join(name);
    outcome.write(&dir)?;
    println!("wrote {}", dir.display());
    Ok(outcome.print_verdicts())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Reversibility(common) => {
            let mut raw = load_raw(&common)?;
            let mut cfg = reversibility::Config::default();
            cfg.apply(&mut raw)?;
            raw.finish()?;
            if let Some(r) = common.replicas {
                cfg.replicas = r;
            }
            run_in_pool(&common, || reversibility::run(&cfg, common.seed))
                .and_then(|o| finish(o, &common, "reversibility"))
        }
        Command::Posterior1d(common) => {
            let mut raw = load_raw(&common)?;
            let mut cfg = posterior1d::Config::default();
            cfg.apply(&mut raw)?;
            raw.finish()?;
            run_in_pool(&common, || posterior1d::run(&cfg, common.seed))
                .and_then(|o| finish(o, &common, "posterior1d"))
        }
        Command::PerturbProjection(common) => {
            let mut raw = load_raw(&common)?;
            let mut cfg = projection::Config::default();
            cfg.apply(&mut raw)?;
            raw.finish()?;
            if let Some(r) = common.replicas {
                cfg.one_step_replicas = r;
            }
            run_in_pool(&common, || projection::run(&cfg, common.seed))
                .and_then(|o| finish(o, &common, "perturb-projection"))
        }
        Command::PerturbInnovation(common) => {
            let mut raw = load_raw(&common)?;
            let mut cfg = innovation::Config::default();
            cfg.apply(&mut raw)?;
            raw.finish()?;
            if let Some(r) = common.replicas {
                cfg.moment_draws = r;
            }
            run_in_pool(&common, || innovation::run(&cfg, common.seed))
                .and_then(|o| finish(o, &common, "perturb-innovation"))
        }
        Command::MseCurve(common) => {
            let mut raw = load_raw(&common)?;
            let mut cfg = mse::Config::default();
            cfg.apply(&mut raw)?;
            raw.finish()?;
            if let Some(r) = common.replicas {
                cfg.replicas = r;
            }
            run_in_pool(&common, || mse::run(&cfg, common.seed))
                .and_then(|o| finish(o, &common, "mse-curve"))
        }
        Command::Diagnostics(common) => {
            let mut raw = load_raw(&common)?;
            let mut cfg = diagnostics::Config::default();
            cfg.apply(&mut raw)?;
            raw.finish()?;
            if let Some(r) = common.replicas {
                cfg.drift_reps = r;
                cfg.contraction_reps = r;
            }
            run_in_pool(&common, || diagnostics::run(&cfg, common.seed))
                .and_then(|o| finish(o, &common, "diagnostics"))
        }
    }
}

fn run_in_pool<T>(common: &Common, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match common.threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more gates failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
