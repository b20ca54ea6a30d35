//! Replication probe: train one model, then rerun the trial under several
//! seeds and summarize the headline pattern per replication. Used to judge
//! power and arm balance before running the full acceptance gate.
//!
//! Usage: replication_probe [population] [trial_days] [reps] [e0]

use vigil::config::RunConfig;
use vigil::run::{check_pattern, replicate_once, simulate_burn_in, train_model};

fn main() -> Result<(), vigil::Error> {
    let args: Vec<String> = std::env::args().collect();
    let population: usize = args.get(1).map_or(8000, |s| s.parse().unwrap());
    let trial_days: u32 = args.get(2).map_or(138, |s| s.parse().unwrap());
    let reps: usize = args.get(3).map_or(8, |s| s.parse().unwrap());
    let e0: f64 = args.get(4).map_or(0.2, |s| s.parse().unwrap());

    let mut cfg = RunConfig::default();
    cfg.sim.population = population;
    cfg.trial.duration_days = trial_days;
    cfg.sim.response_e0 = e0;
    cfg.sim.horizon_days = cfg.trial.start_day + trial_days + cfg.max_window_end();
    cfg.validate()?;

    let t0 = std::time::Instant::now();
    let world = simulate_burn_in(&cfg)?;
    let (model, train) = train_model(&cfg, &world.events_by_day, &world.population.players)?;
    drop(world);
    println!(
        "model trained in {:.0}s; holdout AUC {:.4}, median prob {:.3}, share>thr {:.5}",
        t0.elapsed().as_secs_f64(),
        train.stacked_holdout_auc,
        train.median_edge_prob,
        train.share_above_threshold
    );

    let mut passes = 0usize;
    for rep in 0..reps {
        let t1 = std::time::Instant::now();
        let report = replicate_once(&cfg, &model, cfg.sim.seed + 1000 + rep as u64, 61 + rep as u64)?;
        let check = check_pattern(&report);
        let fw = report.effect_table("violation", "all", "women").unwrap();
        let fm = report.effect_table("violation", "all", "men").unwrap();
        let w1 = &fw.cells[0];
        let m1 = &fm.cells[0];
        let night = report.night.iter().find(|n| n.gender == "women").unwrap();
        let night_m = report.night.iter().find(|n| n.gender == "men").unwrap();
        let (sig, total) = report.significant_cell_stats();
        if check.all() {
            passes += 1;
        }
        println!(
            "rep {rep}: {:.0}s | f w1 n={}/{} eff={:+.3} p={:.2e} | m w1 n={}/{} eff={:+.3} p={:.3} | night f p={:.2e} ({:+.3}) m p={:.3} | sig {}/{} | {}{}{}{} {}",
            t1.elapsed().as_secs_f64(),
            w1.n_intervention,
            w1.n_control,
            w1.effect.unwrap_or(f64::NAN),
            w1.p_value.unwrap_or(f64::NAN),
            m1.n_intervention,
            m1.n_control,
            m1.effect.unwrap_or(f64::NAN),
            m1.p_value.unwrap_or(f64::NAN),
            night.p.unwrap_or(f64::NAN),
            (night.mean[0] - night.mean[1]) / night.mean[1],
            night_m.p.unwrap_or(f64::NAN),
            sig,
            total,
            u8::from(check.female_w1_significant),
            u8::from(check.female_effect_decays),
            u8::from(check.male_w1_null),
            u8::from(check.female_night_reduced),
            if check.all() { "PASS" } else { "fail" },
        );
    }
    println!("\npattern pass rate: {passes}/{reps}");
    Ok(())
}
