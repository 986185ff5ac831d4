//! `cvqkd-opt`: batch pipeline for rate-adaptive CV-QKD parameter
//! optimization — Monte-Carlo FER campaigns, FER-surface fitting, joint
//! (V_A, beta) key-rate optimization, distance sweeps, fixed-beta baseline
//! comparison and validation runs.

mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use manifest::RunManifest;
use stages::{CliError, Ctx, StageStatus};

#[derive(Debug, Parser)]
#[command(name = "cvqkd-opt", version, about)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "configs/desk.toml")]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the worker-thread count from the config.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the output directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Monte-Carlo FER campaign and write per-rate sample tables.
    Simulate,
    /// Fit per-rate polynomials and build the FER surface JSON.
    Fit,
    /// Optimize (V_A, beta) at one distance.
    Optimize {
        /// Fiber length in km (default: config [optimize] or first sweep
        /// distance).
        #[arg(long)]
        distance: Option<f64>,
    },
    /// Optimize every configured distance and write the sweep tables.
    Sweep,
    /// Compare the joint optimum against the fixed-beta baseline.
    Compare,
    /// Re-simulate the sweep optima and report predicted vs simulated FER.
    Validate,
    /// simulate + fit + sweep + compare + validate.
    Pipeline,
}

fn run(cli: Cli) -> Result<StageStatus, CliError> {
    let (mut cfg, cfg_bytes) = Config::load(&cli.config).map_err(CliError::Config)?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.run.workers = workers.max(1);
    }
    if let Some(out) = cli.out {
        cfg.run.out_dir = out;
    }
    let out_dir = cfg.run.out_dir.clone();
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        CliError::Config(anyhow::anyhow!("cannot create {}: {e}", out_dir.display()))
    })?;
    let ctx = Ctx {
        seed: cfg.run.seed,
        workers: cfg.run.workers,
        out_dir: out_dir.clone(),
        config_path: cli.config.clone(),
        config: cfg,
    };
    let manifest_path = out_dir.join("manifest.json");
    let mut manifest = RunManifest::load_or_new(&manifest_path, &cfg_bytes, ctx.seed);
    let status = match cli.command {
        Command::Simulate => stages::stage_simulate(&ctx, &mut manifest),
        Command::Fit => stages::stage_fit(&ctx, &mut manifest),
        Command::Optimize { distance } => stages::stage_optimize(&ctx, &mut manifest, distance),
        Command::Sweep => stages::stage_sweep(&ctx, &mut manifest),
        Command::Compare => stages::stage_compare(&ctx, &mut manifest),
        Command::Validate => stages::stage_validate(&ctx, &mut manifest),
        Command::Pipeline => stages::stage_pipeline(&ctx, &mut manifest),
    }?;
    manifest.save(&manifest_path).map_err(CliError::Config)?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(StageStatus::Ok) => ExitCode::SUCCESS,
        Ok(StageStatus::Partial) => {
            eprintln!("completed with incomplete Monte-Carlo tables (budget exhausted)");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
