use std::collections::HashMap;

use crate::domain::{Day, InteractionEvent, PlayerId};
use crate::error::{Error, Result};

/// Label window length: the week immediately preceding the inference date.
pub const LABEL_WINDOW_DAYS: u32 = 7;

/// Ground-truth labels for one inference day.
#[derive(Clone, Debug)]
pub struct LabelSet {
    pub inference_day: Day,
    /// Player -> violated as actor within `[inference_day-7, inference_day-1]`.
    pub violated: HashMap<PlayerId, bool>,
}

impl LabelSet {
    pub fn is_positive(&self, player: PlayerId) -> bool {
        self.violated.get(&player).copied().unwrap_or(false)
    }
}

/// Labels every player that appears in `events`; positive iff they committed
/// at least one violation in the 7 days strictly preceding `inference_day`.
pub fn assign_labels(events: &[InteractionEvent], inference_day: Day) -> Result<LabelSet> {
    if inference_day < 8 {
        return Err(Error::Domain(format!(
            "inference day {inference_day} has no full label window (need >= 8)"
        )));
    }
    let lo = inference_day - LABEL_WINDOW_DAYS;
    let hi = inference_day - 1;
    let mut violated: HashMap<PlayerId, bool> = HashMap::new();
    for ev in events {
        violated.entry(ev.actor).or_insert(false);
        violated.entry(ev.target).or_insert(false);
        if ev.violation && ev.day >= lo && ev.day <= hi {
            violated.insert(ev.actor, true);
        }
    }
    Ok(LabelSet {
        inference_day,
        violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Layer;

    fn viol(day: Day, actor: PlayerId) -> InteractionEvent {
        InteractionEvent {
            day,
            hour: 22,
            layer: Layer::Dm,
            actor,
            target: actor + 100,
            violation: true,
        }
    }

    #[test]
    fn violation_inside_week_is_positive() {
        let ls = assign_labels(&[viol(17, 5)], 20).unwrap();
        assert!(ls.is_positive(5));
    }

    #[test]
    fn violation_eight_days_before_is_negative() {
        let ls = assign_labels(&[viol(12, 5)], 20).unwrap();
        assert!(!ls.is_positive(5));
    }

    #[test]
    fn violation_on_inference_day_is_negative() {
        // Window is strictly preceding: [13, 19] for inference day 20.
        let ls = assign_labels(&[viol(20, 5)], 20).unwrap();
        assert!(!ls.is_positive(5));
    }

    #[test]
    fn boundary_days_enumerated() {
        for (day, expect) in [(12u32, false), (13, true), (19, true), (20, false)] {
            let ls = assign_labels(&[viol(day, 5)], 20).unwrap();
            assert_eq!(ls.is_positive(5), expect, "day {day}");
        }
    }

    #[test]
    fn early_inference_day_is_an_error() {
        assert!(assign_labels(&[], 7).is_err());
        assert!(assign_labels(&[], 8).is_ok());
    }

    #[test]
    fn consecutive_windows_overlap_six_days() {
        let a = 20u32;
        let b = 21u32;
        let wa: Vec<u32> = (a - 7..=a - 1).collect();
        let wb: Vec<u32> = (b - 7..=b - 1).collect();
        let overlap = wa.iter().filter(|d| wb.contains(d)).count();
        assert_eq!(overlap, 6);
    }
}
