//! Stacking phase: per-pair feature rows from the five weak learners plus
//! player metadata, and the boosted-tree metamodel over them.

mod auc;
mod gbdt;
pub mod tree;

pub use auc::evaluate_auc;
pub use gbdt::{predict_gbdt, predict_logit, train_gbdt, GatedPredictor, GbdtHyper, GbdtModel};
pub use tree::{FeatureMatrix, RegressionTree};

use crate::domain::{FeatureVector, FEATURE_DIM};

/// Stacked row dimensionality: five probabilities, five presence
/// indicators, then actor and target feature blocks.
pub const STACK_DIM: usize = 10 + 2 * FEATURE_DIM;

/// Per-layer weak-learner outputs for one directed pair. `None` means the
/// pair is absent from that layer; its slots become (0, indicator 0).
#[derive(Clone, Copy, Debug, Default)]
pub struct WeakOutputs {
    pub probs: [Option<f64>; 5],
}

/// Assembles the fixed-schema stacked feature row for one directed pair.
pub fn assemble_stack_features(
    weak: &WeakOutputs,
    actor: &FeatureVector,
    target: &FeatureVector,
) -> [f64; STACK_DIM] {
    let mut row = [0.0; STACK_DIM];
    for (i, p) in weak.probs.iter().enumerate() {
        match p {
            Some(p) => {
                row[i] = *p;
                row[5 + i] = 1.0;
            }
            None => {
                row[i] = 0.0;
                row[5 + i] = 0.0;
            }
        }
    }
    row[10..10 + FEATURE_DIM].copy_from_slice(&actor.to_array());
    row[10 + FEATURE_DIM..].copy_from_slice(&target.to_array());
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Gender, PlayerRecord};

    fn feat(age: u32) -> FeatureVector {
        let p = PlayerRecord {
            player_id: 0,
            avatar_gender: Gender::Male,
            avatar_age: age,
            install_day: -10,
            penalized: false,
            predator_propensity: 0.0,
            victim_susceptibility: 0.0,
            responsiveness: 0.0,
            login_prob: 1.0,
            activity_mult: 1.0,
            night_share: 0.2,
        };
        FeatureVector::zero_activity(&p, 3, 10.0)
    }

    #[test]
    fn all_layers_present() {
        let weak = WeakOutputs { probs: [Some(0.1), Some(0.2), Some(0.3), Some(0.4), Some(0.5)] };
        let row = assemble_stack_features(&weak, &feat(20), &feat(15));
        assert_eq!(&row[0..5], &[0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(&row[5..10], &[1.0; 5]);
    }

    #[test]
    fn missing_layers_zeroed_with_zero_indicator() {
        let mut weak = WeakOutputs::default();
        weak.probs[1] = Some(0.9); // DM only
        let row = assemble_stack_features(&weak, &feat(20), &feat(15));
        for i in 0..5 {
            if i == 1 {
                assert_eq!(row[i], 0.9);
                assert_eq!(row[5 + i], 1.0);
            } else {
                assert_eq!(row[i], 0.0);
                assert_eq!(row[5 + i], 0.0);
            }
        }
    }

    #[test]
    fn row_dimension_is_constant() {
        let a = assemble_stack_features(&WeakOutputs::default(), &feat(20), &feat(15));
        let weak = WeakOutputs { probs: [Some(0.5); 5] };
        let b = assemble_stack_features(&weak, &feat(30), &feat(40));
        assert_eq!(a.len(), b.len());
        assert_eq!(a.len(), STACK_DIM);
    }
}
