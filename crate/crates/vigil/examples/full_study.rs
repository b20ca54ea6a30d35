//! End-to-end study in memory: simulate, train, run the trial, analyze, and
//! print the headline numbers. Population and durations come from the
//! command line so the same walkthrough scales from smoke test to full run.
//!
//! Usage: full_study [population] [trial_days] [seed]

use vigil::config::RunConfig;
use vigil::run::full_pipeline_in_memory;

fn main() -> Result<(), vigil::Error> {
    let args: Vec<String> = std::env::args().collect();
    let population: usize = args.get(1).map_or(2000, |s| s.parse().expect("population"));
    let trial_days: u32 = args.get(2).map_or(40, |s| s.parse().expect("trial days"));
    let seed: u64 = args.get(3).map_or(1, |s| s.parse().expect("seed"));

    let mut cfg = RunConfig::default();
    cfg.sim.population = population;
    cfg.sim.seed = seed;
    cfg.trial.duration_days = trial_days;
    cfg.sim.horizon_days = cfg.trial.start_day + trial_days + cfg.max_window_end();
    cfg.validate()?;

    let t0 = std::time::Instant::now();
    let (_model, train, outcome, report) = full_pipeline_in_memory(&cfg)?;
    println!("pipeline finished in {:.1}s", t0.elapsed().as_secs_f64());

    println!("\n== model ==");
    println!(
        "stacked AUC: train {:.4}, holdout {:.4} ({} holdout pairs, {} positive)",
        train.stacked_train_auc,
        train.stacked_holdout_auc,
        train.holdout_pairs,
        train.holdout_positives
    );
    println!(
        "weak holdout AUCs: {}",
        train
            .weak_holdout_auc
            .iter()
            .map(|a| format!("{a:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!(
        "player-level AUC: violator {:.4}, victim {:.4}",
        train.player_violator_auc, train.player_victim_auc
    );
    println!(
        "edge probability distribution: median {:.4}, p99 {:.4}, share above {} = {:.5}",
        train.median_edge_prob,
        train.p99_edge_prob,
        cfg.pipeline.threshold,
        train.share_above_threshold
    );

    println!("\n== trial ==");
    let total_events: usize = outcome.world.events_by_day.iter().map(|d| d.len()).sum();
    let dispatches: usize = outcome.ledger.dispatch_days.iter().map(|d| d.len()).sum();
    let unique: usize = outcome
        .ledger
        .listing_days
        .iter()
        .filter(|d| !d.is_empty())
        .count();
    println!(
        "{} events, {} ledger entries, {} dispatches, {} unique listed players",
        total_events,
        outcome.ledger.entries.len(),
        dispatches,
        unique
    );

    println!("\n== covariates ==");
    for c in &report.covariates {
        println!(
            "{}: unique {}/{}, age p={:?}, usage p={:?}, once {:.2}/{:.2}",
            c.gender,
            c.unique_intervention,
            c.unique_control,
            c.age_p,
            c.usage_p,
            c.once_share[0],
            c.once_share[1]
        );
    }

    println!("\n== primary effects (violation, all listed) ==");
    for gender in ["women", "men"] {
        if let Some(t) = report.effect_table("violation", "all", gender) {
            for cell in &t.cells {
                println!(
                    "{gender} {}-{}: n {}/{}, rates {:.4}/{:.4}, effect {:?}, p {:?}",
                    cell.window.lo,
                    cell.window.hi,
                    cell.n_intervention,
                    cell.n_control,
                    cell.rate_intervention(),
                    cell.rate_control(),
                    cell.effect,
                    cell.p_value
                );
            }
        }
    }

    println!("\n== night usage ==");
    for nt in &report.night {
        println!(
            "{}: mean {:.4}/{:.4}, median {:.3}/{:.3}, p {:?}",
            nt.gender, nt.mean[0], nt.mean[1], nt.quantiles[0][2], nt.quantiles[1][2], nt.p
        );
    }

    println!("\n== calibration ==");
    for cal in &report.calibration {
        println!("{}: n {}, spearman {:?}", cal.kind, cal.n, cal.spearman);
    }
    Ok(())
}
