//! Rank-sum oracle: explicit bitmask enumeration of every way to assign the
//! pooled mid-ranks to the first sample. Integer-exact via doubled ranks.
//! Limited to n1 + n2 <= 20 (the production exact range); intended use in
//! tests keeps totals at or below 16.

use crate::error::{Error, Result};
use crate::stats::wilcoxon::doubled_mid_ranks;

/// Two-sided exact p by direct enumeration of all C(n, n1) assignments.
pub fn wilcoxon_exact_enumerated(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    let n1 = sample_a.len();
    let n2 = sample_b.len();
    let n = n1 + n2;
    if n1 == 0 || n2 == 0 {
        return Err(Error::Stats("oracle: empty sample".into()));
    }
    if n > 20 {
        return Err(Error::Stats("oracle: enumeration limited to n <= 20".into()));
    }
    let doubled = doubled_mid_ranks(sample_a, sample_b);
    let w2_obs: u64 = doubled[..n1].iter().sum();
    let mu2 = (n1 as u64) * (n as u64 + 1);
    let dev_obs = w2_obs.abs_diff(mu2);

    let mut kept: u64 = 0;
    let mut total: u64 = 0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let mut w2: u64 = 0;
        for (i, &r) in doubled.iter().enumerate() {
            if mask & (1 << i) != 0 {
                w2 += r;
            }
        }
        total += 1;
        if w2.abs_diff(mu2) >= dev_obs {
            kept += 1;
        }
    }
    Ok(kept as f64 / total as f64)
}
