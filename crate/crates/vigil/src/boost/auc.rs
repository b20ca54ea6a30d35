//! AUC in the Mann-Whitney form: the probability a random positive outranks
//! a random negative, ties counted one half.

use crate::error::{Error, Result};
use crate::stats::wilcoxon::doubled_mid_ranks;

pub fn evaluate_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    assert_eq!(scores.len(), labels.len());
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(Error::Stats(
            "auc requires at least one positive and one negative".into(),
        ));
    }
    let ranks = doubled_mid_ranks(scores, &[]);
    let rank_sum_pos: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(&r, _)| r as f64 / 2.0)
        .sum();
    Ok((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_example() {
        // positives {0.35, 0.8} vs negatives {0.1, 0.4}: 3 wins of 4 pairs.
        let auc = evaluate_auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap();
        assert!((auc - 0.75).abs() < 1e-12);
    }

    #[test]
    fn perfect_ordering_gives_one() {
        let auc = evaluate_auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap();
        assert_eq!(auc, 1.0);
    }

    #[test]
    fn constant_scores_give_half() {
        let auc = evaluate_auc(&[0.5; 6], &[true, false, true, false, true, false]).unwrap();
        assert!((auc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(evaluate_auc(&[0.1, 0.2], &[true, true]).is_err());
    }
}
