//! `copresence`: simulate a shrunk day, run the artifact filter, evaluate
//! against the reference and draw ambulatograms.
//!
//! Settings come from `--config FILE` (JSON), then `COPRESENCE_*`
//! environment variables, then flags; later sources win.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Ctx;
use config::{invalid, Inputs, Invalid, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "copresence", version, about = "Zone co-presence from multi-sensor detection streams")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long, global = true, env = "COPRESENCE_CONFIG")]
    config: Option<PathBuf>,
    /// Base seed; run k uses a seed derived from it
    #[arg(long, global = true, env = "COPRESENCE_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true, env = "COPRESENCE_RUNS")]
    runs: Option<usize>,
    /// Abort on malformed stream lines instead of skipping them
    #[arg(long, global = true, env = "COPRESENCE_STRICT")]
    strict: bool,
    /// Replay streams at SPEED scenario seconds per wall second
    #[arg(long, global = true, value_name = "SPEED", env = "COPRESENCE_REALTIME")]
    realtime: Option<f64>,
    /// Output directory
    #[arg(long, global = true, env = "COPRESENCE_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "COPRESENCE_ZONES")]
    zones: Option<PathBuf>,
    #[arg(long, global = true, env = "COPRESENCE_SENSORS")]
    sensors: Option<PathBuf>,
    #[arg(long, global = true, env = "COPRESENCE_SCENARIO")]
    scenario: Option<PathBuf>,
    #[arg(long, global = true, env = "COPRESENCE_NOISE")]
    noise: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write detection streams, reference intervals and manifests
    Simulate,
    /// Filter streams into raw and filtered ambulatograms
    Run {
        /// Process this stream into the output directory instead of the
        /// simulated runs
        #[arg(long)]
        stream: Option<PathBuf>,
    },
    /// Compare ambulatograms with the reference and write the report
    Eval,
    /// Draw measured-over-reference SVGs
    Render,
    /// simulate, run, eval and render
    All,
    /// Print the effective configuration
    Config,
}

fn context(common: Common) -> anyhow::Result<Ctx> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(Overrides {
        zones: common.zones,
        sensors: common.sensors,
        scenario: common.scenario,
        noise: common.noise,
        out: common.out,
        seed: common.seed,
        runs: common.runs,
        strict: common.strict,
        realtime: common.realtime,
    });
    cfg.validate()?;
    let inputs = Inputs::load(&cfg)?;
    Ok(Ctx { cfg, inputs })
}

fn existing_runs(ctx: &Ctx) -> anyhow::Result<()> {
    for k in 0..ctx.cfg.runs {
        let dir = ctx.cfg.run_dir(k);
        if !dir.is_dir() {
            return Err(invalid(format!("{} not found; run `simulate` first", dir.display())));
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let ctx = context(cli.common)?;
    let label = |k: usize| (k + 1).to_string();
    match cli.cmd {
        Cmd::Config => {
            println!("{}", serde_json::to_string_pretty(&ctx.cfg)?);
        }
        Cmd::Simulate => {
            let dirs = commands::for_each_run(ctx.cfg.runs, |k| commands::simulate_run(&ctx, k))?;
            for d in dirs {
                println!("{}", d.display());
            }
        }
        Cmd::Run { stream: Some(stream) } => commands::run_stream(&ctx, &stream, &ctx.cfg.out)?,
        Cmd::Run { stream: None } => {
            existing_runs(&ctx)?;
            commands::for_each_run(ctx.cfg.runs, |k| {
                let dir = ctx.cfg.run_dir(k);
                commands::run_stream(&ctx, &dir.join(commands::DETECTIONS_FILE), &dir)
            })?;
        }
        Cmd::Eval => {
            existing_runs(&ctx)?;
            let reports =
                commands::for_each_run(ctx.cfg.runs, |k| commands::eval_run(&ctx, &ctx.cfg.run_dir(k), &label(k)))?;
            print!("{}", commands::write_report(&ctx.cfg, &reports)?);
        }
        Cmd::Render => {
            existing_runs(&ctx)?;
            commands::for_each_run(ctx.cfg.runs, |k| commands::render_run(&ctx, &ctx.cfg.run_dir(k), &label(k)))?;
        }
        Cmd::All => {
            let reports = commands::for_each_run(ctx.cfg.runs, |k| {
                let dir = commands::simulate_run(&ctx, k)?;
                commands::run_stream(&ctx, &dir.join(commands::DETECTIONS_FILE), &dir)?;
                let r = commands::eval_run(&ctx, &dir, &label(k))?;
                commands::render_run(&ctx, &dir, &label(k))?;
                Ok(r)
            })?;
            print!("{}", commands::write_report(&ctx.cfg, &reports)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
