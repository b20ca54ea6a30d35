//! Risk-score validity check: binned outcome rates and the rank correlation
//! between scores and realized outcomes over the following 14 days.

use crate::error::{Error, Result};
use crate::stats::wilcoxon::doubled_mid_ranks;

/// One score decile with its realized outcome rate.
#[derive(Clone, Debug)]
pub struct CalibrationBin {
    pub score_lo: f64,
    pub score_hi: f64,
    pub n: usize,
    pub outcome_rate: f64,
}

pub struct Calibration {
    pub bins: Vec<CalibrationBin>,
    /// Spearman rank correlation between score and outcome indicator.
    pub spearman: f64,
}

/// Decile-binned outcome rates plus Spearman correlation. Errors when all
/// scores are identical (the correlation is undefined).
pub fn risk_outcome_calibration(scores: &[f64], outcomes: &[bool]) -> Result<Calibration> {
    assert_eq!(scores.len(), outcomes.len());
    if scores.len() < 2 {
        return Err(Error::Stats("calibration requires at least two scores".into()));
    }
    let first = scores[0];
    if scores.iter().all(|&s| s == first) {
        return Err(Error::Stats("constant scores: correlation undefined".into()));
    }

    let outcome_vals: Vec<f64> = outcomes.iter().map(|&o| f64::from(o)).collect();
    let spearman = spearman_rank_corr(scores, &outcome_vals);

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).unwrap());
    let nbins = 10usize.min(scores.len());
    let mut bins = Vec::with_capacity(nbins);
    for b in 0..nbins {
        let lo = b * order.len() / nbins;
        let hi = (b + 1) * order.len() / nbins;
        if lo == hi {
            continue;
        }
        let slice = &order[lo..hi];
        let hits = slice.iter().filter(|&&i| outcomes[i]).count();
        bins.push(CalibrationBin {
            score_lo: scores[slice[0]],
            score_hi: scores[*slice.last().unwrap()],
            n: slice.len(),
            outcome_rate: hits as f64 / slice.len() as f64,
        });
    }
    Ok(Calibration { bins, spearman })
}

/// Spearman correlation: Pearson correlation of mid-ranks.
pub fn spearman_rank_corr(x: &[f64], y: &[f64]) -> f64 {
    let rx: Vec<f64> = doubled_mid_ranks(x, &[])
        .into_iter()
        .map(|r| r as f64 / 2.0)
        .collect();
    let ry: Vec<f64> = doubled_mid_ranks(y, &[])
        .into_iter()
        .map(|r| r as f64 / 2.0)
        .collect();
    pearson(&rx, &ry)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_outcomes_give_positive_spearman() {
        let scores: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let outcomes: Vec<bool> = (0..100).map(|i| i >= 70).collect();
        let cal = risk_outcome_calibration(&scores, &outcomes).unwrap();
        assert!(cal.spearman > 0.5);
        let rates: Vec<f64> = cal.bins.iter().map(|b| b.outcome_rate).collect();
        assert!(rates.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn three_point_exact_value() {
        // scores [1,2,3], outcomes [0,0,1]: ranks (1,2,3) vs (1.5,1.5,3)
        // -> r = 1.5 / (sqrt(2) * sqrt(1.5)) = sqrt(3)/2.
        let cal = risk_outcome_calibration(&[1.0, 2.0, 3.0], &[false, false, true]).unwrap();
        assert!((cal.spearman - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_scores_are_an_error() {
        assert!(risk_outcome_calibration(&[0.5, 0.5, 0.5], &[true, false, true]).is_err());
    }
}
