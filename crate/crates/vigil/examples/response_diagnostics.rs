//! Diagnostic: intervened vs control listed women, daily violation counts
//! and night-activity share by day offset from first listing. Shows whether
//! the warning response actually moves behavior.
//!
//! Usage: response_diagnostics [population] [trial_days] [seed]

use vigil::config::RunConfig;
use vigil::domain::{is_night_hour, Gender};
use vigil::pipeline::Arm;
use vigil::run::full_pipeline_in_memory;

fn main() -> Result<(), vigil::Error> {
    let args: Vec<String> = std::env::args().collect();
    let population: usize = args.get(1).map_or(4000, |s| s.parse().unwrap());
    let trial_days: u32 = args.get(2).map_or(40, |s| s.parse().unwrap());
    let seed: u64 = args.get(3).map_or(1, |s| s.parse().unwrap());

    let mut cfg = RunConfig::default();
    cfg.sim.population = population;
    cfg.sim.seed = seed;
    cfg.trial.duration_days = trial_days;
    cfg.sim.horizon_days = cfg.trial.start_day + trial_days + cfg.max_window_end();
    cfg.validate()?;

    let (_model, _train, outcome, _report) = full_pipeline_in_memory(&cfg)?;
    let world = &outcome.world;
    let ledger = &outcome.ledger;

    // first-listing anchor for listed women
    let mut anchor = vec![None; population];
    let mut arm_of = vec![Arm::Control; population];
    for (idx, days) in ledger.listing_days.iter().enumerate() {
        if days.is_empty() || world.population.players[idx].avatar_gender != Gender::Female {
            continue;
        }
        anchor[idx] = Some(days[0]);
        arm_of[idx] = ledger.arm_of(idx as u32);
    }
    let n_i = anchor
        .iter()
        .zip(&arm_of)
        .filter(|(a, arm)| a.is_some() && **arm == Arm::Intervention)
        .count();
    let n_c = anchor
        .iter()
        .zip(&arm_of)
        .filter(|(a, arm)| a.is_some() && **arm == Arm::Control)
        .count();
    println!("listed women: intervention {n_i}, control {n_c}");

    // daily violations + night activity share by offset bucket
    const BUCKETS: usize = 6;
    let bucket_of = |off: i64| -> Option<usize> {
        match off {
            1..=7 => Some(0),
            8..=14 => Some(1),
            15..=28 => Some(2),
            29..=56 => Some(3),
            57..=112 => Some(4),
            113..=168 => Some(5),
            _ => None,
        }
    };
    let labels = ["1-7", "8-14", "15-28", "29-56", "57-112", "113-168"];
    let mut viol = [[0u64; BUCKETS]; 2];
    let mut night_ev = [[0u64; BUCKETS]; 2];
    let mut all_ev = [[0u64; BUCKETS]; 2];
    for evs in &world.events_by_day {
        for ev in evs {
            let idx = ev.actor as usize;
            if let Some(a) = anchor[idx] {
                let off = ev.day as i64 - a as i64;
                if let Some(b) = bucket_of(off) {
                    let arm = arm_of[idx].index();
                    all_ev[arm][b] += 1;
                    if is_night_hour(ev.hour) {
                        night_ev[arm][b] += 1;
                    }
                    if ev.violation {
                        viol[arm][b] += 1;
                    }
                }
            }
        }
    }
    println!("\noffset    violations/event I vs C        night share I vs C");
    for b in 0..BUCKETS {
        let vi = viol[0][b] as f64 / all_ev[0][b].max(1) as f64;
        let vc = viol[1][b] as f64 / all_ev[1][b].max(1) as f64;
        let ni = night_ev[0][b] as f64 / all_ev[0][b].max(1) as f64;
        let nc = night_ev[1][b] as f64 / all_ev[1][b].max(1) as f64;
        println!(
            "{:>8}  {:.5} vs {:.5} (ratio {:.3})   {:.4} vs {:.4} (ratio {:.3})",
            labels[b],
            vi,
            vc,
            vi / vc,
            ni,
            nc,
            ni / nc
        );
    }

    // receipts distribution (intervention arm)
    let mut receipt_hist = [0usize; 8];
    for (idx, d) in ledger.dispatch_days.iter().enumerate() {
        if anchor[idx].is_some() && arm_of[idx] == Arm::Intervention {
            receipt_hist[d.len().min(7)] += 1;
        }
    }
    println!("\nreceipt counts among listed intervention women: {receipt_hist:?}");

    // mean response multiplier on each offset day
    let mut msum = [[0.0f64; BUCKETS]; 2];
    let mut mcnt = [[0u64; BUCKETS]; 2];
    for idx in 0..population {
        if let Some(a) = anchor[idx] {
            let arm = arm_of[idx].index();
            for off in 1..=168i64 {
                let day = a as i64 + off;
                if day >= world.params.horizon_days as i64 {
                    break;
                }
                if let Some(b) = bucket_of(off) {
                    msum[arm][b] += world.response_multiplier(idx as u32, day as u32);
                    mcnt[arm][b] += 1;
                }
            }
        }
    }
    println!("\nmean hazard multiplier by offset (I vs C):");
    for b in 0..BUCKETS {
        println!(
            "{:>8}  {:.4} vs {:.4}",
            labels[b],
            msum[0][b] / mcnt[0][b].max(1) as f64,
            msum[1][b] / mcnt[1][b].max(1) as f64
        );
    }
    Ok(())
}
