//! Null-calibration probe: with the response effect switched off, arms are
//! exchangeable and the significant-cell fraction over many replications
//! should sit near the test level alpha.
//!
//! Usage: null_calibration [population] [trial_days] [reps]

use rayon::prelude::*;
use vigil::config::RunConfig;
use vigil::run::{replicate_once, significant_fraction, simulate_burn_in, train_model};

fn main() -> Result<(), vigil::Error> {
    let args: Vec<String> = std::env::args().collect();
    let population: usize = args.get(1).map_or(1400, |s| s.parse().unwrap());
    let trial_days: u32 = args.get(2).map_or(30, |s| s.parse().unwrap());
    let reps: u64 = args.get(3).map_or(40, |s| s.parse().unwrap());

    let mut cfg = RunConfig::default();
    cfg.sim.population = population;
    cfg.sim.response_e0 = 0.0;
    cfg.trial.duration_days = trial_days;
    cfg.sim.horizon_days = cfg.trial.start_day + trial_days + cfg.max_window_end();
    cfg.validate()?;

    let t0 = std::time::Instant::now();
    let world = simulate_burn_in(&cfg)?;
    let (model, train) = train_model(&cfg, &world.events_by_day, &world.population.players)?;
    drop(world);
    println!(
        "trained in {:.0}s; holdout AUC {:.3}, share>thr {:.5}",
        t0.elapsed().as_secs_f64(),
        train.stacked_holdout_auc,
        train.share_above_threshold
    );

    let t1 = std::time::Instant::now();
    let reports: Vec<_> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            replicate_once(&cfg, &model, cfg.sim.seed + 10_000 + rep, 300 + rep).expect("rep")
        })
        .collect();
    let (hits, total, frac) = significant_fraction(&reports);
    println!(
        "{} reps in {:.0}s ({:.1}s each): {hits}/{total} significant cells, fraction {frac:.4}",
        reps,
        t1.elapsed().as_secs_f64(),
        t1.elapsed().as_secs_f64() / reps as f64
    );

    // cohort-size sanity: how big are the cells?
    let r = &reports[0];
    for t in r.effects.iter().filter(|t| t.cohort == "all") {
        let c = &t.cells[0];
        println!(
            "  {} {}: n {}/{}, affected {}/{}",
            t.outcome, t.gender, c.n_intervention, c.n_control, c.affected_intervention, c.affected_control
        );
    }
    Ok(())
}
