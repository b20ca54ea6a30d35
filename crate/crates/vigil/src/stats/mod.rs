//! Trial statistics: exact and classical tests, effect estimates, and the
//! behavioral metrics used in the evaluation tables.

pub mod calibration;
pub mod contingency;
pub mod effect;
pub mod fisher;
pub mod night;
pub mod special;
pub mod ttest;
pub mod wilcoxon;

pub use calibration::{risk_outcome_calibration, spearman_rank_corr, Calibration};
pub use contingency::pearson_chi_square_2x2;
pub use effect::{
    default_analysis_windows, effect_size, windowed_effect_table, CohortMember, EffectCell,
    WindowSpec,
};
pub use fisher::{fisher_exact_2x2, ContingencyTable2x2};
pub use night::{compare_night_usage, night_usage_per_player, usage_quantiles, NIGHT_PERIOD_DAYS};
pub use ttest::students_t;
pub use wilcoxon::wilcoxon_rank_sum;
