//! Night-usage metric: hourly windows between 20:00 and 04:59 (nine per
//! night) in which a player used DM or AC, averaged over the period after
//! their listing day.

use std::collections::HashMap;

use crate::domain::{is_night_hour, Day, InteractionEvent, PlayerId};
use crate::error::Result;
use crate::stats::wilcoxon::wilcoxon_rank_sum;

/// Days after the anchor over which night usage is averaged.
pub const NIGHT_PERIOD_DAYS: u32 = 84;

/// Per-player mean count of distinct night hourly windows per day, over
/// `[anchor+1, anchor+period]`. An hourly window counts once per day no
/// matter how many events fall in it; the maximum per day is 9.
pub fn night_usage_per_player(
    events: &[InteractionEvent],
    cohort: &[(PlayerId, Day)],
    period_days: u32,
) -> Vec<f64> {
    let anchor: HashMap<PlayerId, Day> = cohort.iter().copied().collect();
    // (player, day) -> bitmask of night hours hit
    let mut masks: HashMap<(PlayerId, Day), u16> = HashMap::new();
    for ev in events {
        if !ev.layer.supports_violation() || !is_night_hour(ev.hour) {
            continue;
        }
        if let Some(&a) = anchor.get(&ev.actor) {
            if ev.day > a && ev.day <= a + period_days {
                let bit = night_bit(ev.hour);
                *masks.entry((ev.actor, ev.day)).or_insert(0) |= 1 << bit;
            }
        }
    }
    let mut totals: HashMap<PlayerId, u32> = HashMap::new();
    for ((p, _), mask) in &masks {
        *totals.entry(*p).or_insert(0) += mask.count_ones();
    }
    cohort
        .iter()
        .map(|(p, _)| totals.get(p).copied().unwrap_or(0) as f64 / period_days as f64)
        .collect()
}

fn night_bit(hour: u8) -> u8 {
    // 20..=23 -> 0..=3, 0..=4 -> 4..=8
    if hour >= 20 {
        hour - 20
    } else {
        hour + 4
    }
}

/// Arm comparison of night usage: per-arm values plus the rank-sum p.
pub struct NightComparison {
    pub intervention: Vec<f64>,
    pub control: Vec<f64>,
    pub p_value: f64,
}

pub fn compare_night_usage(intervention: Vec<f64>, control: Vec<f64>) -> Result<NightComparison> {
    let (_, p_value) = wilcoxon_rank_sum(&intervention, &control)?;
    Ok(NightComparison {
        intervention,
        control,
        p_value,
    })
}

/// Quantiles used by the night-usage table (2.5, 25, 50, 75, 97.5 percent).
pub fn usage_quantiles(values: &[f64]) -> [f64; 5] {
    if values.is_empty() {
        return [f64::NAN; 5];
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        // linear interpolation on [0, n-1]
        let h = p * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    [q(0.025), q(0.25), q(0.50), q(0.75), q(0.975)]
}
