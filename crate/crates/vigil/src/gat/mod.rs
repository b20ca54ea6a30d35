//! Weak-learning phase: one graph-attention model per interaction layer,
//! scoring per-relationship violation probabilities. Forward and backward
//! passes are explicit; training is full-batch gradient descent.

mod model;
mod train;

pub use model::{
    edge_probability, gat_forward, Activation, AttentionGraph, ForwardTrace, GatParams,
};
pub use train::{
    loss_and_gradient, train_weak_learner, train_weak_learner_snapshots, Snapshot, TrainHyper,
};
