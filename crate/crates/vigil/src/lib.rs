//! Risk scoring and messaging-trial simulation for an avatar platform.
//!
//! The crate covers the full loop at desk scale: an agent-based generator of
//! synthetic platform activity, a two-phase relationship risk model (per-layer
//! graph-attention weak learners stacked by gradient-boosted trees), the daily
//! high-risk listing and capped message dispatch of a randomized controlled
//! trial, and the exact statistics used to evaluate the intervention.
//!
//! Start from the `examples/` directory for runnable walkthroughs of each
//! stage, or the `vigil` binary for the file-based pipeline.

pub mod boost;
pub mod domain;
pub mod error;
pub mod gat;
pub mod oracle;
pub mod config;
pub mod pipeline;
pub mod run;
pub mod seeded;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
