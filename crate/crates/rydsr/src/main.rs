//! Command-line front end for the superradiant decay pipelines.

use clap::{Parser, Subcommand};
use rydsr::atomic::LevelRef;
use rydsr::config::RunConfig;
use rydsr::error::Result;
use rydsr::report::{
    cmd_cascade, cmd_channel, cmd_levels, cmd_lifetimes, cmd_map, run_all, CommandOutput,
    RunManifest,
};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "rydsr",
    version,
    about = "Collective radiative decay of dense ultracold Rydberg gases"
)]
struct Cli {
    /// Configuration file (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the parallel stages (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Channels retained per level in the cascade.
    #[arg(long, global = true)]
    cap: Option<usize>,

    /// Gas density override, cm^-3.
    #[arg(long = "density-cm3", global = true)]
    density_cm3: Option<f64>,

    /// Initial level override, e.g. 40p.
    #[arg(long, global = true)]
    initial: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Level energies and the channel table out of the initial level.
    Levels,
    /// Trajectory, classification and intensity files for one channel.
    Channel {
        /// Upper level, e.g. 40p.
        upper: String,
        /// Lower level, e.g. 39s.
        lower: String,
    },
    /// Dense and vacuum effective decay times with harmonic totals.
    Lifetimes,
    /// Decay network and the detected-atom signal.
    Cascade,
    /// Critical superradiance boundary and channel placement.
    Map,
    /// Every pipeline in one run.
    RunAll,
}

fn apply_overrides(cfg: &mut RunConfig, cli: &Cli) {
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(cap) = cli.cap {
        cfg.cascade.cap = cap;
    }
    if let Some(d) = cli.density_cm3 {
        cfg.sample.density_cm3 = d;
    }
    if let Some(lv) = &cli.initial {
        cfg.levels.initial = lv.clone();
    }
}

fn run(cli: &Cli) -> Result<(RunConfig, String, CommandOutput, u128)> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut cfg, cli);
    cfg.validate()?;

    let pool = cfg.thread_pool()?;
    let started = Instant::now();
    let (name, out) = pool.install(|| -> Result<(String, CommandOutput)> {
        match &cli.command {
            Command::Levels => Ok(("levels".into(), cmd_levels(&cfg)?)),
            Command::Channel { upper, lower } => {
                let up = LevelRef::parse(upper)?;
                let lo = LevelRef::parse(lower)?;
                Ok((format!("channel {up} {lo}"), cmd_channel(&cfg, up, lo)?))
            }
            Command::Lifetimes => Ok(("lifetimes".into(), cmd_lifetimes(&cfg)?)),
            Command::Cascade => Ok(("cascade".into(), cmd_cascade(&cfg)?)),
            Command::Map => Ok(("map".into(), cmd_map(&cfg)?)),
            Command::RunAll => Ok(("run-all".into(), run_all(&cfg)?)),
        }
    })?;
    Ok((cfg, name, out, started.elapsed().as_millis()))
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((cfg, name, out, duration_ms)) => {
            let manifest = RunManifest::new(&name, &cfg, &out, duration_ms);
            match manifest.write(&cfg, &out) {
                Ok(path) => {
                    for line in &out.summary {
                        println!("{line}");
                    }
                    for warning in &out.warnings {
                        eprintln!("warning: {warning}");
                    }
                    println!("manifest: {}", path.display());
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    std::process::exit(e.exit_code());
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
