//! File-based pipeline stages. Stages communicate only through artifact
//! files in the output directory; each verifies that its inputs carry the
//! current config hash before using them.

use std::io::BufRead;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::domain::{parse_event_line, InteractionEvent, PlayerRecord};
use crate::error::{Error, Result};
use crate::pipeline::{LedgerEntry, TrialLedger};
use crate::run::analysis::{analyze, AnalysisReport};
use crate::run::artifact::{open_artifact, write_artifact, ArtifactHeader};
use crate::run::model_io::RiskModel;
use crate::run::report::render_report;
use crate::run::train_stage::{train_model, TrainReport};
use crate::run::trial_stage::{run_trial, ScoreRow, TrialOutcome};
use crate::sim::World;

pub struct StagePaths {
    base: PathBuf,
}

impl StagePaths {
    pub fn new(cfg: &RunConfig) -> StagePaths {
        StagePaths {
            base: cfg.output.dir.clone(),
        }
    }

    pub fn events_pre(&self) -> PathBuf {
        self.base.join("events_pre.csv")
    }
    pub fn model(&self) -> PathBuf {
        self.base.join("model.json")
    }
    pub fn train_summary(&self) -> PathBuf {
        self.base.join("train_summary.csv")
    }
    pub fn ledger(&self) -> PathBuf {
        self.base.join("ledger.csv")
    }
    pub fn events(&self) -> PathBuf {
        self.base.join("events.csv")
    }
    pub fn scores(&self) -> PathBuf {
        self.base.join("scores.csv")
    }
    pub fn edges(&self) -> PathBuf {
        self.base.join("edges.csv")
    }
    pub fn analysis_json(&self) -> PathBuf {
        self.base.join("analysis.json")
    }
    pub fn effects_csv(&self) -> PathBuf {
        self.base.join("effects.csv")
    }
    pub fn covariates_csv(&self) -> PathBuf {
        self.base.join("covariates.csv")
    }
    pub fn night_csv(&self) -> PathBuf {
        self.base.join("night_usage.csv")
    }
    pub fn calibration_csv(&self) -> PathBuf {
        self.base.join("calibration.csv")
    }
    pub fn report_txt(&self) -> PathBuf {
        self.base.join("report.txt")
    }
}

fn header(cfg: &RunConfig, kind: &str) -> ArtifactHeader {
    ArtifactHeader::new(kind, &cfg.hash(), cfg.sim.seed, cfg.trial.trial_seed)
}

/// Steps a fresh world through the burn-in period.
pub fn simulate_burn_in(cfg: &RunConfig) -> Result<World> {
    let mut world = World::new(cfg.sim.clone())?;
    for _ in 0..cfg.trial.start_day {
        world.step_day()?;
    }
    Ok(world)
}

pub struct SimulateSummary {
    pub days: u32,
    pub events: usize,
    pub violations: usize,
}

/// `simulate`: burn-in event log for training.
pub fn stage_simulate(cfg: &RunConfig) -> Result<SimulateSummary> {
    let world = simulate_burn_in(cfg)?;
    let paths = StagePaths::new(cfg);
    write_artifact(
        &paths.events_pre(),
        &header(cfg, "events-pre"),
        world.events_by_day.iter().flatten().map(|e| e.to_line()),
    )?;
    let events = world.events_by_day.iter().map(|d| d.len()).sum();
    let violations = world
        .events_by_day
        .iter()
        .flatten()
        .filter(|e| e.violation)
        .count();
    Ok(SimulateSummary {
        days: cfg.trial.start_day,
        events,
        violations,
    })
}

fn read_events(path: &Path, cfg: &RunConfig, kind: &str) -> Result<Vec<InteractionEvent>> {
    let (_, reader) = open_artifact(path, kind, Some(&cfg.hash()))?;
    let mut events = Vec::new();
    let display = path.display().to_string();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        events.push(parse_event_line(&line, &display, i + 3)?);
    }
    Ok(events)
}

/// Groups a flat event list into per-day buckets covering `days` days.
pub fn group_by_day(events: Vec<InteractionEvent>, days: u32) -> Vec<Vec<InteractionEvent>> {
    let mut by_day: Vec<Vec<InteractionEvent>> = vec![Vec::new(); days as usize];
    for ev in events {
        by_day[ev.day as usize].push(ev);
    }
    by_day
}

/// `train`: fit the risk model from the burn-in log.
pub fn stage_train(cfg: &RunConfig) -> Result<TrainReport> {
    let paths = StagePaths::new(cfg);
    let events = read_events(&paths.events_pre(), cfg, "events-pre")?;
    let events_by_day = group_by_day(events, cfg.trial.start_day);
    let population = crate::sim::generate_population(&cfg.sim)?;
    let (model, report) = train_model(cfg, &events_by_day, &population.players)?;
    model.save(&paths.model())?;
    let mut lines = vec![
        "metric,value".to_string(),
        format!("stacked_train_auc,{}", report.stacked_train_auc),
        format!("stacked_holdout_auc,{}", report.stacked_holdout_auc),
        format!("player_violator_auc,{}", report.player_violator_auc),
        format!("player_victim_auc,{}", report.player_victim_auc),
        format!("median_edge_prob,{}", report.median_edge_prob),
        format!("p99_edge_prob,{}", report.p99_edge_prob),
        format!("share_above_threshold,{}", report.share_above_threshold),
        format!("train_rows,{}", report.train_rows),
        format!("train_positives,{}", report.train_positives),
        format!("holdout_pairs,{}", report.holdout_pairs),
        format!("holdout_positives,{}", report.holdout_positives),
        format!("gbdt_loss_first,{}", report.gbdt_loss_first),
        format!("gbdt_loss_last,{}", report.gbdt_loss_last),
    ];
    for (li, (t, h)) in report
        .weak_train_auc
        .iter()
        .zip(&report.weak_holdout_auc)
        .enumerate()
    {
        lines.push(format!("weak{li}_train_auc,{t}"));
        lines.push(format!("weak{li}_holdout_auc,{h}"));
    }
    write_artifact(&paths.train_summary(), &header(cfg, "train-summary"), lines)?;
    Ok(report)
}

pub struct TrialSummary {
    pub listings: usize,
    pub dispatches: usize,
    pub events: usize,
}

/// `trial`: run the randomized trial and follow-up, emitting the ledger,
/// the complete event log, and the daily risk scores.
pub fn stage_trial(cfg: &RunConfig) -> Result<TrialSummary> {
    let paths = StagePaths::new(cfg);
    let events = read_events(&paths.events_pre(), cfg, "events-pre")?;
    let events_by_day = group_by_day(events, cfg.trial.start_day);
    let model = RiskModel::load(&paths.model())?;
    if model.config_hash != cfg.hash() {
        return Err(Error::ArtifactMismatch(format!(
            "model was trained under config {} but the current config hashes to {}",
            model.config_hash,
            cfg.hash()
        )));
    }
    let world = World::resume(cfg.sim.clone(), events_by_day)?;
    let outcome = run_trial(cfg, &model, world)?;
    write_trial_outputs(cfg, &paths, &outcome)?;
    Ok(TrialSummary {
        listings: outcome.ledger.entries.len(),
        dispatches: outcome
            .ledger
            .dispatch_days
            .iter()
            .map(|d| d.len())
            .sum(),
        events: outcome.world.events_by_day.iter().map(|d| d.len()).sum(),
    })
}

pub fn write_trial_outputs(cfg: &RunConfig, paths: &StagePaths, outcome: &TrialOutcome) -> Result<()> {
    write_artifact(
        &paths.ledger(),
        &header(cfg, "ledger"),
        outcome.ledger.entries.iter().map(|e| e.to_line()),
    )?;
    write_artifact(
        &paths.events(),
        &header(cfg, "events"),
        outcome.world.events_by_day.iter().flatten().map(|e| e.to_line()),
    )?;
    write_artifact(
        &paths.scores(),
        &header(cfg, "scores"),
        outcome.score_rows.iter().map(|r| r.to_line()),
    )?;
    write_artifact(
        &paths.edges(),
        &header(cfg, "edges"),
        outcome.edge_rows.iter().map(|r| r.to_line()),
    )?;
    Ok(())
}

fn read_ledger(cfg: &RunConfig, paths: &StagePaths, population: usize) -> Result<TrialLedger> {
    let path = paths.ledger();
    let (hdr, reader) = open_artifact(&path, "ledger", Some(&cfg.hash()))?;
    let mut ledger = TrialLedger::new(population, hdr.trial_seed, cfg.pipeline.top_k);
    let display = path.display().to_string();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        ledger
            .entries
            .push(LedgerEntry::parse_line(&line, &display, i + 3)?);
    }
    ledger.rebuild_indices();
    Ok(ledger)
}

fn read_scores(cfg: &RunConfig, paths: &StagePaths) -> Result<Vec<ScoreRow>> {
    let path = paths.scores();
    let (_, reader) = open_artifact(&path, "scores", Some(&cfg.hash()))?;
    let mut rows = Vec::new();
    let display = path.display().to_string();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        rows.push(ScoreRow::parse_line(&line, &display, i + 3)?);
    }
    Ok(rows)
}

/// `analyze`: effect, covariate, night-usage, and calibration tables.
pub fn stage_analyze(cfg: &RunConfig) -> Result<AnalysisReport> {
    let paths = StagePaths::new(cfg);
    let events = read_events(&paths.events(), cfg, "events")?;
    let population = crate::sim::generate_population(&cfg.sim)?;
    let ledger = read_ledger(cfg, &paths, population.players.len())?;
    let scores = read_scores(cfg, &paths)?;
    let report = analyze(cfg, &population.players, &events, &ledger, &scores)?;
    write_analysis_outputs(cfg, &paths, &report)?;
    Ok(report)
}

pub fn write_analysis_outputs(
    cfg: &RunConfig,
    paths: &StagePaths,
    report: &AnalysisReport,
) -> Result<()> {
    let json = serde_json::to_string(report).map_err(|e| Error::Model(e.to_string()))?;
    write_artifact(&paths.analysis_json(), &header(cfg, "analysis"), [json])?;

    let mut effect_lines = vec![
        "outcome,cohort,gender,window_lo,window_hi,n_i,n_c,affected_i,affected_c,events_i,events_c,rate_i,rate_c,effect,effect_incident,p".to_string(),
    ];
    let na = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
    for t in &report.effects {
        for c in &t.cells {
            effect_lines.push(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                t.outcome,
                t.cohort,
                t.gender,
                c.window.lo,
                c.window.hi,
                c.n_intervention,
                c.n_control,
                c.affected_intervention,
                c.affected_control,
                c.events_intervention,
                c.events_control,
                c.rate_intervention(),
                c.rate_control(),
                na(c.effect),
                na(c.effect_incident),
                na(c.p_value),
            ));
        }
    }
    write_artifact(&paths.effects_csv(), &header(cfg, "effects"), effect_lines)?;

    let mut cov_lines = vec![
        "gender,cumulative_i,cumulative_c,unique_i,unique_c,age_mean_i,age_sd_i,age_mean_c,age_sd_c,age_p,usage_mean_i,usage_sd_i,usage_mean_c,usage_sd_c,usage_p,once_i,once_c,once_p,five_plus_i,five_plus_c,five_plus_p".to_string(),
    ];
    for c in &report.covariates {
        cov_lines.push(format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.gender,
            c.cumulative_intervention,
            c.cumulative_control,
            c.unique_intervention,
            c.unique_control,
            c.age_mean[0],
            c.age_sd[0],
            c.age_mean[1],
            c.age_sd[1],
            na(c.age_p),
            c.usage_mean[0],
            c.usage_sd[0],
            c.usage_mean[1],
            c.usage_sd[1],
            na(c.usage_p),
            c.once_share[0],
            c.once_share[1],
            na(c.once_p),
            c.five_plus_share[0],
            c.five_plus_share[1],
            na(c.five_plus_p),
        ));
    }
    write_artifact(&paths.covariates_csv(), &header(cfg, "covariates"), cov_lines)?;

    let mut night_lines =
        vec!["gender,arm,n,q2_5,q25,q50,q75,q97_5,mean,p".to_string()];
    for nt in &report.night {
        for (ai, arm) in ["intervention", "control"].iter().enumerate() {
            night_lines.push(format!(
                "{},{},{},{},{},{},{},{},{},{}",
                nt.gender,
                arm,
                nt.n[ai],
                nt.quantiles[ai][0],
                nt.quantiles[ai][1],
                nt.quantiles[ai][2],
                nt.quantiles[ai][3],
                nt.quantiles[ai][4],
                nt.mean[ai],
                na(nt.p),
            ));
        }
    }
    write_artifact(&paths.night_csv(), &header(cfg, "night-usage"), night_lines)?;

    let mut cal_lines = vec!["kind,bin,score_lo,score_hi,n,outcome_rate,spearman".to_string()];
    for cal in &report.calibration {
        for (bi, (lo, hi, n, rate)) in cal.bins.iter().enumerate() {
            cal_lines.push(format!(
                "{},{},{},{},{},{},{}",
                cal.kind,
                bi,
                lo,
                hi,
                n,
                rate,
                na(cal.spearman),
            ));
        }
    }
    write_artifact(&paths.calibration_csv(), &header(cfg, "calibration"), cal_lines)?;
    Ok(())
}

/// `report`: format the analysis into the human-readable table layout.
pub fn stage_report(cfg: &RunConfig) -> Result<String> {
    let paths = StagePaths::new(cfg);
    let (_, reader) = open_artifact(&paths.analysis_json(), "analysis", Some(&cfg.hash()))?;
    let mut json = String::new();
    let mut reader = reader;
    std::io::Read::read_to_string(&mut reader, &mut json)?;
    let report: AnalysisReport =
        serde_json::from_str(json.trim()).map_err(|e| Error::Model(e.to_string()))?;
    let text = render_report(&report);
    write_artifact(
        &paths.report_txt(),
        &header(cfg, "report"),
        text.lines(),
    )?;
    Ok(text)
}

/// Full in-memory pipeline (no files): burn-in, train, trial, analyze.
pub fn full_pipeline_in_memory(
    cfg: &RunConfig,
) -> Result<(RiskModel, TrainReport, TrialOutcome, AnalysisReport)> {
    let world = simulate_burn_in(cfg)?;
    let (model, train_report) = train_model(cfg, &world.events_by_day, &world.population.players)?;
    let outcome = run_trial(cfg, &model, world)?;
    let events = outcome.world.all_events();
    let players: Vec<PlayerRecord> = outcome.world.population.players.clone();
    let report = analyze(cfg, &players, &events, &outcome.ledger, &outcome.score_rows)?;
    Ok((model, train_report, outcome, report))
}
