//! Pipeline orchestration: the file-based stages behind the CLI plus their
//! in-memory cores used by tests and the examples.

pub mod analysis;
pub mod artifact;
pub mod model_io;
pub mod replication;
pub mod report;
pub mod scoring;
pub mod selftest;
pub mod stages;
pub mod train_stage;
pub mod trial_stage;

pub use analysis::{analyze, AnalysisReport};
pub use model_io::RiskModel;
pub use replication::{check_pattern, replicate_once, significant_fraction, PatternCheck};
pub use selftest::run_selftest;
pub use stages::{
    full_pipeline_in_memory, group_by_day, simulate_burn_in, stage_analyze, stage_report,
    stage_simulate, stage_train, stage_trial, StagePaths,
};
pub use train_stage::{train_model, TrainReport};
pub use trial_stage::{run_trial, ScoreRow, TrialOutcome};
