//! Fisher's exact test for 2x2 tables.
//!
//! Two-sided convention: sum the hypergeometric point probabilities of every
//! table with the observed margins whose point probability does not exceed
//! the observed one, with 1e-7 relative slack for floating-point ties.

use crate::error::{Error, Result};

/// Counts a,b / c,d with rows = arm and columns = outcome / no outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable2x2 { a, b, c, d }
    }

    pub fn row_totals(&self) -> (u64, u64) {
        (self.a + self.b, self.c + self.d)
    }

    pub fn col_totals(&self) -> (u64, u64) {
        (self.a + self.c, self.b + self.d)
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn margins_valid(&self) -> bool {
        let (r1, r2) = self.row_totals();
        let (c1, c2) = self.col_totals();
        r1 > 0 && r2 > 0 && c1 > 0 && c2 > 0
    }
}

/// Relative slack when comparing point probabilities to the observed one.
pub const TIE_SLACK: f64 = 1e-7;

/// Largest N handled on the exact integer path. C(45,22)^2 * 1e7 fits u128.
const EXACT_N_LIMIT: u64 = 45;

/// Two-sided Fisher exact p-value.
pub fn fisher_exact_2x2(table: &ContingencyTable2x2) -> Result<f64> {
    if !table.margins_valid() {
        return Err(Error::Stats(
            "fisher_exact_2x2 requires positive row and column margins".into(),
        ));
    }
    let p = if table.total() <= EXACT_N_LIMIT {
        fisher_integer(table)
    } else {
        fisher_logspace(table)
    };
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Exact path: point probabilities as u128 binomial products over a common
/// denominator; tie comparisons are integer-exact including the 1e-7 slack.
fn fisher_integer(table: &ContingencyTable2x2) -> f64 {
    let (r1, _r2) = table.row_totals();
    let (c1, _c2) = table.col_totals();
    let n = table.total();
    let lo = r1.saturating_sub(n - c1);
    let hi = r1.min(c1);

    let numer = |k: u64| -> u128 { choose_u128(r1, k) * choose_u128(n - r1, c1 - k) };
    let obs = numer(table.a);
    let mut kept: u128 = 0;
    let mut total: u128 = 0;
    for k in lo..=hi {
        let w = numer(k);
        total += w;
        // w <= obs * (1 + 1e-7)  <=>  w * 1e7 <= obs * (1e7 + 1)
        if w * 10_000_000u128 <= obs * 10_000_001u128 {
            kept += w;
        }
    }
    kept as f64 / total as f64
}

fn choose_u128(n: u64, k: u64) -> u128 {
    debug_assert!(k <= n && n <= EXACT_N_LIMIT);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Log-space path for larger tables. Point probabilities and the sum use
/// floats; inclusion decisions within a narrow band of the tie cutoff fall
/// back to exact big-integer comparison so knife-edge ties never depend on
/// rounding.
fn fisher_logspace(table: &ContingencyTable2x2) -> f64 {
    let (r1, _) = table.row_totals();
    let (c1, _) = table.col_totals();
    let n = table.total();
    let lo = r1.saturating_sub(n - c1);
    let hi = r1.min(c1);

    // ln n! table by compensated summation: absolute error stays near one
    // ulp, well inside the 1e-12 agreement budget (the Lanczos ln-gamma
    // alone drifts ~1e-10 here)
    let lnf = ln_factorial_table(n as usize);
    let ln_choose_t = |n: u64, k: u64| lnf[n as usize] - lnf[k as usize] - lnf[(n - k) as usize];
    let ln_denom = ln_choose_t(n, c1);
    let ln_point = |k: u64| ln_choose_t(r1, k) + ln_choose_t(n - r1, c1 - k) - ln_denom;
    let ln_obs = ln_point(table.a);
    let cutoff = ln_obs + TIE_SLACK.ln_1p();
    // well beyond ln-gamma rounding, far below any real spacing of tables
    const GRAY: f64 = 1e-9;

    let mut p = 0.0;
    for k in lo..=hi {
        let lp = ln_point(k);
        let include = if (lp - cutoff).abs() <= GRAY {
            exact_tie_compare(table, k)
        } else {
            lp <= cutoff
        };
        if include {
            p += lp.exp();
        }
    }
    p.min(1.0)
}

/// Cumulative ln k! for 0..=n by Kahan summation.
fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(0.0);
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for k in 1..=n {
        let term = (k as f64).ln() - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
        table.push(sum);
    }
    table
}

/// Exact inclusion test `P(k) <= P(obs) * (1 + 1e-7)` on big-integer
/// binomial numerators (the common denominator cancels).
fn exact_tie_compare(table: &ContingencyTable2x2, k: u64) -> bool {
    use num_bigint::BigUint;
    let (r1, r2) = table.row_totals();
    let (c1, _) = table.col_totals();
    let big_choose = |n: u64, k: u64| -> BigUint {
        let k = k.min(n - k);
        let mut acc = BigUint::from(1u32);
        for i in 0..k {
            acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        acc
    };
    let num_k = big_choose(r1, k) * big_choose(r2, c1 - k);
    let num_obs = big_choose(r1, table.a) * big_choose(r2, c1 - table.a);
    num_k * BigUint::from(10_000_000u64) <= num_obs * BigUint::from(10_000_001u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_table_is_modal() {
        let p = fisher_exact_2x2(&ContingencyTable2x2::new(5, 5, 5, 5)).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_one_table() {
        // Margins 4/4 over N=8: point probabilities {1,16,36,16,1}/70,
        // observed k=3 keeps {1,16,16,1} -> 34/70.
        let p = fisher_exact_2x2(&ContingencyTable2x2::new(3, 1, 1, 3)).unwrap();
        assert!((p - 34.0 / 70.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_table() {
        let p = fisher_exact_2x2(&ContingencyTable2x2::new(10, 0, 0, 10)).unwrap();
        assert!((p - 2.0 / 184_756.0).abs() < 1e-15);
    }

    #[test]
    fn zero_margin_is_an_error() {
        assert!(fisher_exact_2x2(&ContingencyTable2x2::new(0, 0, 3, 4)).is_err());
        assert!(fisher_exact_2x2(&ContingencyTable2x2::new(0, 3, 0, 4)).is_err());
    }

    #[test]
    fn logspace_path_agrees_with_integer_path_near_limit() {
        // N = 44 runs on the integer path; force the log path and compare.
        let t = ContingencyTable2x2::new(12, 10, 8, 14);
        let exact = fisher_integer(&t);
        let logp = fisher_logspace(&t);
        assert!(
            ((exact - logp) / exact).abs() < 1e-10,
            "{exact} vs {logp}"
        );
    }

    #[test]
    fn row_swap_preserves_p() {
        let a = fisher_exact_2x2(&ContingencyTable2x2::new(7, 2, 3, 9)).unwrap();
        let b = fisher_exact_2x2(&ContingencyTable2x2::new(3, 9, 7, 2)).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}
