//! Wilcoxon rank-sum test. Exact permutation distribution (mid-ranks for
//! ties) when n1 + n2 <= 20; normal approximation with tie correction and
//! continuity correction otherwise.

use crate::error::{Error, Result};
use crate::stats::special::normal_cdf;

/// Total sample size at or below which the exact distribution is enumerated.
pub const EXACT_LIMIT: usize = 20;

/// Mid-ranks of the pooled sample, doubled so that every rank is an integer.
/// Returned per input value, pooled order = a then b.
pub fn doubled_mid_ranks(a: &[f64], b: &[f64]) -> Vec<u64> {
    let n = a.len() + b.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let value = |i: usize| if i < a.len() { a[i] } else { b[i - a.len()] };
    idx.sort_by(|&i, &j| value(i).partial_cmp(&value(j)).unwrap());

    let mut doubled = vec![0u64; n];
    let mut pos = 0usize;
    while pos < n {
        let mut end = pos + 1;
        while end < n && value(idx[end]) == value(idx[pos]) {
            end += 1;
        }
        // ranks pos+1 ..= end, averaged, doubled: (pos+1 + end)
        let two_rank = (pos + 1 + end) as u64;
        for &i in &idx[pos..end] {
            doubled[i] = two_rank;
        }
        pos = end;
    }
    doubled
}

/// Rank-sum statistic (of the first sample) and two-sided p-value.
pub fn wilcoxon_rank_sum(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64)> {
    let n1 = sample_a.len();
    let n2 = sample_b.len();
    if n1 == 0 || n2 == 0 {
        return Err(Error::Stats("wilcoxon requires nonempty samples".into()));
    }
    if sample_a.iter().chain(sample_b).any(|v| !v.is_finite()) {
        return Err(Error::Stats("wilcoxon requires finite values".into()));
    }
    let doubled = doubled_mid_ranks(sample_a, sample_b);
    let w2: u64 = doubled[..n1].iter().sum();
    let w = w2 as f64 / 2.0;

    let p = if n1 + n2 <= EXACT_LIMIT {
        exact_two_sided_p(&doubled, n1, w2)
    } else {
        approx_two_sided_p(&doubled, n1, n2, w)
    };
    Ok((w, p))
}

/// Exact two-sided p: enumerate the permutation distribution of the rank sum
/// by dynamic programming over (subset size, doubled rank sum), then sum the
/// probability of all sums at least as far from the mean as observed.
///
/// The mean in doubled units is n1 * (N + 1) exactly, because mid-ranks
/// always sum to N(N+1)/2.
fn exact_two_sided_p(doubled: &[u64], n1: usize, w2_obs: u64) -> f64 {
    let n = doubled.len();
    let max_sum: usize = doubled.iter().sum::<u64>() as usize;
    // counts[j][s] = number of j-subsets with doubled rank sum s
    let mut counts = vec![vec![0u64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1;
    for &r in doubled {
        let r = r as usize;
        for j in (1..=n1).rev() {
            for s in (r..=max_sum).rev() {
                let add = counts[j - 1][s - r];
                if add != 0 {
                    counts[j][s] += add;
                }
            }
        }
    }
    let mu2 = (n1 as u64) * (n as u64 + 1);
    let dev_obs = w2_obs.abs_diff(mu2);
    let mut kept: u64 = 0;
    let mut total: u64 = 0;
    for (s, &cnt) in counts[n1].iter().enumerate() {
        if cnt == 0 {
            continue;
        }
        total += cnt;
        if (s as u64).abs_diff(mu2) >= dev_obs {
            kept += cnt;
        }
    }
    kept as f64 / total as f64
}

/// Normal approximation with tie correction:
/// sigma^2 = n1 n2 / 12 * (N + 1 - sum(t^3 - t) / (N (N - 1))).
fn approx_two_sided_p(doubled: &[u64], n1: usize, n2: usize, w: f64) -> f64 {
    let n = (n1 + n2) as f64;
    let mu = n1 as f64 * (n + 1.0) / 2.0;

    let mut sorted = doubled.to_vec();
    sorted.sort_unstable();
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = (n1 as f64 * n2 as f64 / 12.0) * (n + 1.0 - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0; // every pooled value tied
    }
    let dev = (w - mu).abs();
    let z = (dev - 0.5).max(0.0) / var.sqrt();
    (2.0 * (1.0 - normal_cdf(z))).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_p_one() {
        let (_, p) = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extreme_split_of_four() {
        // a = {1,2}: W = 3, the distribution over C(4,2)=6 subsets puts
        // 1/6 at each of 3 and 7 -> two-sided p = 2/6.
        let (w, p) = wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(w, 3.0);
        assert!((p - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn interleaved_split_of_four() {
        // a = {1,3}: W = 4; |dev| = 1; sums {3,4,6,7} qualify -> 4/6.
        let (w, p) = wilcoxon_rank_sum(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(w, 4.0);
        assert!((p - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn mid_ranks_handle_ties() {
        let d = doubled_mid_ranks(&[1.0, 2.0, 2.0], &[2.0, 5.0]);
        // values 1,2,2,2,5 -> ranks 1, 3, 3, 3, 5 -> doubled 2,6,6,6,10
        assert_eq!(d, vec![2, 6, 6, 6, 10]);
    }

    #[test]
    fn approx_path_is_sane() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 20.0).collect();
        let (_, p) = wilcoxon_rank_sum(&a, &b).unwrap();
        assert!(p < 1e-6, "strong shift should be significant, got {p}");
        let (_, p_null) = wilcoxon_rank_sum(&a, &a.clone()).unwrap();
        assert!((p_null - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(wilcoxon_rank_sum(&[], &[1.0]).is_err());
    }
}
