//! Independent verification oracles.
//!
//! Each oracle recomputes a quantity by a different route than the
//! production code: exact rational enumeration for Fisher, bitmask
//! enumeration for the rank-sum test, central finite differences for
//! gradients, brute-force scans for tree splits, and series / closed-form
//! expressions for distribution tails. They back the test suites and the
//! `selftest` command, and must not share code with the paths they check.

mod fisher_enum;
mod grad_check;
mod split_search;
mod tails;
mod wilcoxon_enum;

pub use fisher_enum::fisher_exact_enumerated;
pub use grad_check::{central_difference_gradient, max_relative_error};
pub use split_search::brute_force_best_split;
pub use tails::{chi_square_df1_sf_series, erf_series, t_two_sided_p_closed_form};
pub use wilcoxon_enum::wilcoxon_exact_enumerated;
