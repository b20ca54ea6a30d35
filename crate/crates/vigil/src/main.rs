//! Thin command-line front end over the library pipeline:
//! simulate -> train -> trial -> analyze -> report, plus selftest.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vigil::config::RunConfig;
use vigil::run;
use vigil::Error;

#[derive(Parser)]
#[command(name = "vigil", version, about = "Risk scoring and messaging-trial simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// TOML config; omitted fields take the study defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Generator seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Risk-score threshold override (strict gating, in (0,1)).
    #[arg(long)]
    threshold: Option<f64>,
    /// Daily listing cap per risk kind per arm.
    #[arg(long)]
    top_k: Option<usize>,
    /// Listing cooldown in days.
    #[arg(long)]
    cooldown_days: Option<u32>,
    /// Population size override.
    #[arg(long)]
    population: Option<usize>,
    /// Trial duration override, in days.
    #[arg(long)]
    days: Option<u32>,
    /// Analysis windows, e.g. "1-14,15-28,29-56".
    #[arg(long)]
    windows: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the burn-in event log.
    Simulate(CommonOpts),
    /// Train the risk model from the burn-in log.
    Train(CommonOpts),
    /// Run the randomized trial and follow-up period.
    Trial(CommonOpts),
    /// Compute effect, covariate, night-usage, and calibration tables.
    Analyze(CommonOpts),
    /// Render the human-readable report.
    Report(CommonOpts),
    /// Run the bundled verification oracles.
    Selftest,
}

fn build_config(opts: &CommonOpts) -> Result<RunConfig, Error> {
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &opts.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = opts.seed {
        cfg.sim.seed = seed;
    }
    if let Some(t) = opts.threshold {
        cfg.pipeline.threshold = t;
    }
    if let Some(k) = opts.top_k {
        cfg.pipeline.top_k = k;
    }
    if let Some(c) = opts.cooldown_days {
        cfg.pipeline.cooldown_days = c;
    }
    if let Some(p) = opts.population {
        cfg.sim.population = p;
    }
    if let Some(d) = opts.days {
        cfg.trial.duration_days = d;
    }
    if let Some(w) = &opts.windows {
        cfg.analysis.windows = parse_windows(w)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_windows(spec: &str) -> Result<Vec<[u32; 2]>, Error> {
    let mut windows = Vec::new();
    for part in spec.split(',') {
        let (lo, hi) = part
            .split_once('-')
            .ok_or_else(|| Error::config("analysis.windows", format!("bad window `{part}`")))?;
        let lo: u32 = lo
            .trim()
            .parse()
            .map_err(|e| Error::config("analysis.windows", format!("bad window `{part}`: {e}")))?;
        let hi: u32 = hi
            .trim()
            .parse()
            .map_err(|e| Error::config("analysis.windows", format!("bad window `{part}`: {e}")))?;
        windows.push([lo, hi]);
    }
    Ok(windows)
}

fn execute(command: &Command) -> Result<(), Error> {
    match command {
        Command::Simulate(opts) => {
            let cfg = build_config(opts)?;
            let s = run::stage_simulate(&cfg)?;
            println!(
                "simulate: {} days, {} events ({} violations) -> {}",
                s.days,
                s.events,
                s.violations,
                run::StagePaths::new(&cfg).events_pre().display()
            );
        }
        Command::Train(opts) => {
            let cfg = build_config(opts)?;
            let r = run::stage_train(&cfg)?;
            println!(
                "train: stacked holdout AUC {:.4} (train {:.4}); weak holdout AUCs {}",
                r.stacked_holdout_auc,
                r.stacked_train_auc,
                r.weak_holdout_auc
                    .iter()
                    .map(|a| format!("{a:.4}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            println!(
                "train: player-level AUC violator {:.4} victim {:.4}; median edge prob {:.4}, share >{} = {:.5}",
                r.player_violator_auc,
                r.player_victim_auc,
                r.median_edge_prob,
                cfg.pipeline.threshold,
                r.share_above_threshold
            );
        }
        Command::Trial(opts) => {
            let cfg = build_config(opts)?;
            let s = run::stage_trial(&cfg)?;
            println!(
                "trial: {} ledger entries, {} dispatches, {} events total",
                s.listings, s.dispatches, s.events
            );
        }
        Command::Analyze(opts) => {
            let cfg = build_config(opts)?;
            let report = run::stage_analyze(&cfg)?;
            let (sig, total) = report.significant_cell_stats();
            println!(
                "analyze: {total} primary effect cells, {sig} significant at alpha={}",
                report.alpha
            );
        }
        Command::Report(opts) => {
            let cfg = build_config(opts)?;
            let text = run::stage_report(&cfg)?;
            println!("{text}");
        }
        Command::Selftest => {
            run::run_selftest(true)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
