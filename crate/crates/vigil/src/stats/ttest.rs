//! Two-sample pooled-variance t-test.

use crate::error::{Error, Result};
use crate::stats::special::t_two_sided_p;

/// Pooled two-sample t statistic and two-sided p with df = n1 + n2 - 2.
pub fn students_t(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64)> {
    let n1 = sample_a.len();
    let n2 = sample_b.len();
    if n1 < 2 || n2 < 2 {
        return Err(Error::Stats(
            "students_t requires at least two observations per sample".into(),
        ));
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let m1 = mean(sample_a);
    let m2 = mean(sample_b);
    let ss = |s: &[f64], m: f64| s.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    let df = (n1 + n2 - 2) as f64;
    let pooled = (ss(sample_a, m1) + ss(sample_b, m2)) / df;
    if pooled <= 0.0 {
        return Err(Error::Stats("zero pooled variance".into()));
    }
    let se = (pooled * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let t = (m1 - m2) / se;
    Ok((t, t_two_sided_p(t, df)))
}
