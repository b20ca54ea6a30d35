//! Windowed intervention-effect estimates in the trial's table layout.

use serde::{Deserialize, Serialize};

use crate::domain::{Day, PlayerId};
use crate::error::Result;
use crate::pipeline::Arm;
use crate::stats::fisher::{fisher_exact_2x2, ContingencyTable2x2};

/// One post-listing analysis window, in day offsets from the anchor:
/// "1–14 days" means the 14 days starting the day after listing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub lo: u32,
    pub hi: u32,
}

impl WindowSpec {
    pub fn label(&self) -> String {
        format!("{}-{} days", self.lo, self.hi)
    }
}

/// The seven standard windows: every two weeks in the first four weeks,
/// four-week blocks afterwards.
pub fn default_analysis_windows() -> Vec<WindowSpec> {
    [
        (1, 14),
        (15, 28),
        (29, 56),
        (57, 84),
        (85, 112),
        (113, 140),
        (141, 168),
    ]
    .into_iter()
    .map(|(lo, hi)| WindowSpec { lo, hi })
    .collect()
}

/// Relative rate reduction (x_c - x_i) / x_c; `None` when x_c = 0.
pub fn effect_size(x_i: f64, x_c: f64) -> Option<f64> {
    if x_c > 0.0 {
        Some((x_c - x_i) / x_c)
    } else {
        None
    }
}

/// One cohort member: a listed player with the day their windows anchor to.
#[derive(Clone, Copy, Debug)]
pub struct CohortMember {
    pub player: PlayerId,
    pub arm: Arm,
    pub anchor_day: Day,
}

/// One window's estimate. Binary rates count affected players; incident
/// rates count events per cohort player. Both are emitted because the unit
/// of the reported violation counts is ambiguous.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EffectCell {
    pub window: WindowSpec,
    pub n_intervention: u64,
    pub n_control: u64,
    pub affected_intervention: u64,
    pub affected_control: u64,
    pub events_intervention: u64,
    pub events_control: u64,
    /// Effect computed from affected-player rates.
    pub effect: Option<f64>,
    /// Effect computed from events-per-player rates.
    pub effect_incident: Option<f64>,
    /// Two-sided Fisher p on the affected-player 2x2 table.
    pub p_value: Option<f64>,
}

impl EffectCell {
    pub fn rate_intervention(&self) -> f64 {
        if self.n_intervention == 0 {
            0.0
        } else {
            self.affected_intervention as f64 / self.n_intervention as f64
        }
    }

    pub fn rate_control(&self) -> f64 {
        if self.n_control == 0 {
            0.0
        } else {
            self.affected_control as f64 / self.n_control as f64
        }
    }
}

/// Builds one row of windowed effects for a cohort against per-player
/// outcome days. `outcome_days(p)` must be sorted ascending.
pub fn windowed_effect_table(
    cohort: &[CohortMember],
    outcome_days: &dyn Fn(PlayerId) -> Vec<Day>,
    windows: &[WindowSpec],
) -> Result<Vec<EffectCell>> {
    let mut cells = Vec::with_capacity(windows.len());
    // Fetch each member's outcome days once.
    let member_days: Vec<Vec<Day>> = cohort.iter().map(|m| outcome_days(m.player)).collect();
    for w in windows {
        let mut n = [0u64; 2];
        let mut affected = [0u64; 2];
        let mut events = [0u64; 2];
        for (m, days) in cohort.iter().zip(&member_days) {
            let lo = m.anchor_day + w.lo;
            let hi = m.anchor_day + w.hi;
            let start = days.partition_point(|&d| d < lo);
            let end = days.partition_point(|&d| d <= hi);
            let count = (end - start) as u64;
            let idx = m.arm.index();
            n[idx] += 1;
            events[idx] += count;
            if count > 0 {
                affected[idx] += 1;
            }
        }
        let (ni, nc) = (n[Arm::Intervention.index()], n[Arm::Control.index()]);
        let (ai, ac) = (
            affected[Arm::Intervention.index()],
            affected[Arm::Control.index()],
        );
        let (ei, ec) = (
            events[Arm::Intervention.index()],
            events[Arm::Control.index()],
        );
        let rate_i = if ni > 0 { ai as f64 / ni as f64 } else { 0.0 };
        let rate_c = if nc > 0 { ac as f64 / nc as f64 } else { 0.0 };
        let inc_i = if ni > 0 { ei as f64 / ni as f64 } else { 0.0 };
        let inc_c = if nc > 0 { ec as f64 / nc as f64 } else { 0.0 };
        let table = ContingencyTable2x2::new(ai, ni - ai, ac, nc - ac);
        let p_value = if ni > 0 && nc > 0 && table.margins_valid() {
            Some(fisher_exact_2x2(&table)?)
        } else {
            None
        };
        cells.push(EffectCell {
            window: *w,
            n_intervention: ni,
            n_control: nc,
            affected_intervention: ai,
            affected_control: ac,
            events_intervention: ei,
            events_control: ec,
            effect: if ni > 0 && nc > 0 {
                effect_size(rate_i, rate_c)
            } else {
                None
            },
            effect_incident: if ni > 0 && nc > 0 {
                effect_size(inc_i, inc_c)
            } else {
                None
            },
            p_value,
        });
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effect_size_reference_points() {
        assert_eq!(effect_size(0.04, 0.04), Some(0.0));
        assert_eq!(effect_size(0.0, 0.5), Some(1.0));
        assert!((effect_size(0.03, 0.04).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(effect_size(0.1, 0.0), None);
    }

    #[test]
    fn effect_size_is_antitone_in_intervention_rate() {
        let xc = 0.3;
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let xi = i as f64 * 0.05;
            let e = effect_size(xi, xc).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn windows_are_contiguous_and_disjoint() {
        let w = default_analysis_windows();
        assert_eq!(w.len(), 7);
        assert_eq!(w[0], WindowSpec { lo: 1, hi: 14 });
        assert_eq!(w[6], WindowSpec { lo: 141, hi: 168 });
        for pair in w.windows(2) {
            assert_eq!(pair[0].hi + 1, pair[1].lo);
        }
    }

    #[test]
    fn zero_control_outcomes_yield_na_without_crash() {
        let cohort = vec![
            CohortMember { player: 1, arm: Arm::Intervention, anchor_day: 10 },
            CohortMember { player: 2, arm: Arm::Control, anchor_day: 10 },
        ];
        let outcomes = |p: PlayerId| -> Vec<Day> {
            if p == 1 {
                vec![12]
            } else {
                vec![]
            }
        };
        let cells =
            windowed_effect_table(&cohort, &outcomes, &[WindowSpec { lo: 1, hi: 14 }]).unwrap();
        assert_eq!(cells[0].effect, None);
        assert_eq!(cells[0].affected_intervention, 1);
    }

    #[test]
    fn window_anchoring_starts_the_day_after_listing() {
        let cohort = vec![CohortMember { player: 1, arm: Arm::Control, anchor_day: 10 }];
        // Outcome on the listing day itself must not count in window 1-14.
        let on_listing_day = |_: PlayerId| -> Vec<Day> { vec![10] };
        let cells =
            windowed_effect_table(&cohort, &on_listing_day, &[WindowSpec { lo: 1, hi: 14 }])
                .unwrap();
        assert_eq!(cells[0].affected_control, 0);
        // Outcome on day anchor+1 and anchor+14 both count; anchor+15 does not.
        for (day, expect) in [(11u32, 1u64), (24, 1), (25, 0)] {
            let f = move |_: PlayerId| -> Vec<Day> { vec![day] };
            let cells =
                windowed_effect_table(&cohort, &f, &[WindowSpec { lo: 1, hi: 14 }]).unwrap();
            assert_eq!(cells[0].affected_control, expect, "day {day}");
        }
    }
}
