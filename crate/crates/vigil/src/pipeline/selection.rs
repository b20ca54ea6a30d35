use crate::domain::PlayerId;
use crate::pipeline::Arm;
use crate::seeded::splitmix64;

/// Stable 50/50 arm assignment from (trial seed, player id). The assignment
/// never changes during a trial and is independent of risk scores.
pub fn assign_group(player: PlayerId, trial_seed: u64) -> Arm {
    let h = splitmix64(splitmix64(trial_seed) ^ (player as u64).wrapping_mul(0x9e3779b97f4a7c15));
    if h & 1 == 0 {
        Arm::Intervention
    } else {
        Arm::Control
    }
}

/// Top-k candidates by score descending, ties broken by ascending player id.
/// Zero scores are never listed, even when k is undersubscribed.
pub fn select_top_k(
    scores: &[f64],
    candidates: impl IntoIterator<Item = PlayerId>,
    k: usize,
) -> Vec<(PlayerId, f64)> {
    let mut ranked: Vec<(PlayerId, f64)> = candidates
        .into_iter()
        .filter_map(|p| {
            let s = scores[p as usize];
            (s > 0.0).then_some((p, s))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_k_takes_the_largest_scores() {
        let scores: Vec<f64> = (0..150).map(|i| (i + 1) as f64).collect();
        let top = select_top_k(&scores, 0..150u32, 100);
        assert_eq!(top.len(), 100);
        assert_eq!(top[0], (149, 150.0));
        assert!(top.iter().all(|&(_, s)| s > 50.0));
    }

    #[test]
    fn ties_break_toward_lower_id() {
        let scores = vec![1.0, 2.0, 2.0, 0.5];
        let top = select_top_k(&scores, 0..4u32, 2);
        assert_eq!(top, vec![(1, 2.0), (2, 2.0)]);
    }

    #[test]
    fn truncates_to_positive_score_candidates() {
        let mut scores = vec![0.0; 100];
        for i in 0..40 {
            scores[i] = 1.0 + i as f64;
        }
        let top = select_top_k(&scores, 0..100u32, 100);
        assert_eq!(top.len(), 40);
    }

    #[test]
    fn assignment_is_stable() {
        for p in 0..200u32 {
            assert_eq!(assign_group(p, 99), assign_group(p, 99));
        }
    }

    #[test]
    fn assignment_is_balanced() {
        let n = 20_000u32;
        let interventions = (0..n)
            .filter(|&p| assign_group(p, 1234) == Arm::Intervention)
            .count() as f64;
        let mean = n as f64 * 0.5;
        let sd = (n as f64 * 0.25).sqrt();
        assert!(
            (interventions - mean).abs() < 3.0 * sd,
            "{interventions} of {n}"
        );
    }

    #[test]
    fn new_seed_reassigns_independently() {
        let n = 10_000u32;
        let changed = (0..n)
            .filter(|&p| assign_group(p, 1) != assign_group(p, 2))
            .count() as f64;
        // roughly half the players should flip
        assert!((changed - n as f64 * 0.5).abs() < 3.0 * (n as f64 * 0.25).sqrt());
    }
}
