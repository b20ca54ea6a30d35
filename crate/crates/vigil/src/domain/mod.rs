//! Core data model: players, interaction events, windowed multiplex graphs,
//! metadata features, and ground-truth labels.

mod event;
mod features;
mod graph;
mod labels;

pub use event::{
    parse_event_line, read_event_log, write_event_log, Gender, InteractionEvent, Layer,
    PlayerRecord, LAYERS,
};
pub use features::{compute_metadata_features, FeatureBuilder, FeatureVector, FEATURE_DIM};
pub use graph::{build_multiplex_graph, DayWindow, Edge, LayerGraph, MultiplexGraph};
pub use labels::{assign_labels, LabelSet, LABEL_WINDOW_DAYS};

/// Day index on the simulation clock (day 0 is the first simulated day;
/// boundaries are midnight in the single canonical clock).
pub type Day = u32;

/// Player identifier; ordinal, unique, dense from 0.
pub type PlayerId = u32;

/// Feature window length in days.
pub const FEATURE_WINDOW_DAYS: u32 = 14;

/// Hours counted as night: 20:00 through 04:59, nine hourly windows.
pub const NIGHT_HOURS: [u8; 9] = [20, 21, 22, 23, 0, 1, 2, 3, 4];

/// True when an hour falls in the 20:00–04:59 night band.
pub fn is_night_hour(hour: u8) -> bool {
    hour >= 20 || hour < 5
}
