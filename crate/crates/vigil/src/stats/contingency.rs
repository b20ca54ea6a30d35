//! Pearson's chi-square test for 2x2 tables (df = 1, no continuity correction).

use crate::error::{Error, Result};
use crate::stats::fisher::ContingencyTable2x2;
use crate::stats::special::chi_square_sf;

/// Pearson chi-square statistic and upper-tail p for a 2x2 table:
/// statistic = N (ad - bc)^2 / (r1 r2 c1 c2).
pub fn pearson_chi_square_2x2(table: &ContingencyTable2x2) -> Result<(f64, f64)> {
    let (r1, r2) = table.row_totals();
    let (c1, c2) = table.col_totals();
    if r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0 {
        return Err(Error::Stats(
            "chi-square requires positive expected counts in every cell".into(),
        ));
    }
    let n = table.total() as f64;
    let (a, b, c, d) = (
        table.a as f64,
        table.b as f64,
        table.c as f64,
        table.d as f64,
    );
    let num = a * d - b * c;
    let stat = n * num * num / (r1 as f64 * r2 as f64 * c1 as f64 * c2 as f64);
    let p = chi_square_sf(stat, 1.0);
    Ok((stat, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_table_has_zero_statistic() {
        let (stat, p) = pearson_chi_square_2x2(&ContingencyTable2x2::new(10, 10, 10, 10)).unwrap();
        assert_eq!(stat, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn known_statistic_and_tail() {
        let (stat, p) = pearson_chi_square_2x2(&ContingencyTable2x2::new(20, 30, 30, 20)).unwrap();
        assert!((stat - 4.0).abs() < 1e-12);
        assert!((p - 0.0455002638963585).abs() < 1e-10);
    }

    #[test]
    fn statistic_scales_linearly_with_counts() {
        let t1 = ContingencyTable2x2::new(12, 7, 5, 16);
        let t2 = ContingencyTable2x2::new(24, 14, 10, 32);
        let (s1, _) = pearson_chi_square_2x2(&t1).unwrap();
        let (s2, _) = pearson_chi_square_2x2(&t2).unwrap();
        assert!((s2 - 2.0 * s1).abs() < 1e-10);
    }

    #[test]
    fn zero_margin_is_an_error() {
        assert!(pearson_chi_square_2x2(&ContingencyTable2x2::new(0, 0, 5, 5)).is_err());
    }
}
