//! Window snapshots and pair scoring: build the 14-day multiplex graph and
//! features, run the five attention models, and stack every observed
//! directed pair through the metamodel.

use rayon::prelude::*;

use crate::boost::{assemble_stack_features, predict_gbdt, GatedPredictor, WeakOutputs};
use crate::domain::{
    build_multiplex_graph, DayWindow, FeatureBuilder, FeatureVector, InteractionEvent,
    MultiplexGraph, PlayerId, PlayerRecord, FEATURE_DIM,
};
use crate::error::Result;
use crate::gat::{edge_probability, gat_forward, AttentionGraph};
use crate::pipeline::ScoredEdge;
use crate::run::model_io::RiskModel;

/// One inference window: graph over the window plus features for every
/// player in the population.
pub struct WindowSnapshot {
    pub window: DayWindow,
    pub graph: MultiplexGraph,
    /// Raw features indexed by player id.
    pub features: Vec<FeatureVector>,
}

impl WindowSnapshot {
    pub fn node_count(&self) -> usize {
        self.graph.nodes.len()
    }

    /// Node index of a player active in the window.
    pub fn node_index(&self, player: PlayerId) -> Option<u32> {
        self.graph
            .nodes
            .binary_search(&player)
            .ok()
            .map(|i| i as u32)
    }

    pub fn player_of_node(&self, node: u32) -> PlayerId {
        self.graph.nodes[node as usize]
    }

    /// Node-aligned normalized feature matrix.
    pub fn normalized_node_matrix(&self, model: &RiskModel) -> Vec<f64> {
        let n = self.node_count();
        let mut out = vec![0.0; n * FEATURE_DIM];
        for (i, &p) in self.graph.nodes.iter().enumerate() {
            let raw = self.features[p as usize].to_array();
            let norm = model.normalize(&raw);
            out[i * FEATURE_DIM..(i + 1) * FEATURE_DIM].copy_from_slice(&norm);
        }
        out
    }
}

/// Builds the snapshot for `window` from per-day event buckets. The feature
/// builder must have ingested every day up to and including `window.end`.
pub fn build_window_snapshot(
    events_by_day: &[Vec<InteractionEvent>],
    window: DayWindow,
    players: &[PlayerRecord],
    builder: &FeatureBuilder,
) -> WindowSnapshot {
    let mut window_events: Vec<InteractionEvent> = Vec::new();
    for day in window.start..=window.end {
        if let Some(evs) = events_by_day.get(day as usize) {
            window_events.extend_from_slice(evs);
        }
    }
    let graph = build_multiplex_graph(&window_events, window);
    let features = builder.features_for_window(players, window);
    WindowSnapshot {
        window,
        graph,
        features,
    }
}

/// Directed pair in node indices with the set of layers containing it.
#[derive(Clone, Copy, Debug)]
pub struct PairEntry {
    pub u: u32,
    pub v: u32,
    pub layer_mask: u8,
}

/// Union of all layers' directed edges by 5-way sorted merge (edge lists are
/// sorted by player id, and node indices preserve that order).
pub fn pair_universe(snap: &WindowSnapshot) -> Vec<PairEntry> {
    let layers: Vec<Vec<(u32, u32)>> = snap
        .graph
        .layers
        .iter()
        .map(|l| {
            l.edges
                .iter()
                .map(|e| {
                    (
                        snap.node_index(e.actor).expect("endpoint in node set"),
                        snap.node_index(e.target).expect("endpoint in node set"),
                    )
                })
                .collect()
        })
        .collect();
    let mut cursors = [0usize; 5];
    let mut out: Vec<PairEntry> = Vec::new();
    loop {
        let mut best: Option<(u32, u32)> = None;
        for (li, list) in layers.iter().enumerate() {
            if let Some(&pair) = list.get(cursors[li]) {
                best = Some(match best {
                    None => pair,
                    Some(b) => b.min(pair),
                });
            }
        }
        let Some((u, v)) = best else { break };
        let mut mask = 0u8;
        for (li, list) in layers.iter().enumerate() {
            if list.get(cursors[li]) == Some(&(u, v)) {
                mask |= 1 << li;
                cursors[li] += 1;
            }
        }
        out.push(PairEntry { u, v, layer_mask: mask });
    }
    out
}

/// Per-layer node embeddings for one snapshot.
pub fn layer_embeddings(model: &RiskModel, snap: &WindowSnapshot) -> Result<Vec<Vec<f64>>> {
    let node_features = snap.normalized_node_matrix(model);
    let n = snap.node_count();
    let results: Vec<Result<Vec<f64>>> = model
        .layer_models
        .par_iter()
        .enumerate()
        .map(|(li, params)| {
            let layer = &snap.graph.layers[li];
            let graph = AttentionGraph::from_layer(
                layer,
                &|p| snap.node_index(p).expect("endpoint in node set"),
                n,
            );
            Ok(gat_forward(&graph, &node_features, params)?.embeddings)
        })
        .collect();
    results.into_iter().collect()
}

/// Weak-learner outputs for one pair given per-layer embeddings.
pub fn weak_outputs_for_pair(
    model: &RiskModel,
    embeddings: &[Vec<f64>],
    u: u32,
    v: u32,
    layer_mask: u8,
) -> WeakOutputs {
    let mut weak = WeakOutputs::default();
    for li in 0..5 {
        if layer_mask & (1 << li) != 0 {
            let params = &model.layer_models[li];
            let d = params.embed_dim();
            let eu = &embeddings[li][u as usize * d..(u as usize + 1) * d];
            let ev = &embeddings[li][v as usize * d..(v as usize + 1) * d];
            weak.probs[li] = Some(edge_probability(eu, ev, params));
        }
    }
    weak
}

/// Scores the window but keeps only pairs whose probability can clear the
/// gating threshold, via a sound early-exit bound; kept probabilities are
/// exactly the full evaluation's. This is what the daily trial loop needs:
/// risk scores only ever sum probabilities strictly above the threshold.
pub fn score_window_gated(
    model: &RiskModel,
    snap: &WindowSnapshot,
    threshold: f64,
) -> Result<Vec<ScoredEdge>> {
    let embeddings = layer_embeddings(model, snap)?;
    let pairs = pair_universe(snap);
    let gated = GatedPredictor::new(&model.stacker);
    let chunks: Vec<Vec<ScoredEdge>> = pairs
        .par_chunks(2048)
        .map(|chunk| {
            let mut out = Vec::new();
            for pe in chunk {
                let weak = weak_outputs_for_pair(model, &embeddings, pe.u, pe.v, pe.layer_mask);
                let actor = snap.player_of_node(pe.u);
                let target = snap.player_of_node(pe.v);
                let row = assemble_stack_features(
                    &weak,
                    &snap.features[actor as usize],
                    &snap.features[target as usize],
                );
                if let Some(prob) = gated.predict_if_above(&row, threshold) {
                    out.push(ScoredEdge {
                        actor,
                        target,
                        prob,
                    });
                }
            }
            out
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Scores every observed directed pair of the window through the stacker.
/// Output order follows the sorted pair universe; safe to parallelize.
pub fn score_window(model: &RiskModel, snap: &WindowSnapshot) -> Result<Vec<ScoredEdge>> {
    let embeddings = layer_embeddings(model, snap)?;
    let pairs = pair_universe(snap);
    let chunks: Vec<Result<Vec<ScoredEdge>>> = pairs
        .par_chunks(2048)
        .map(|chunk| {
            let mut out = Vec::with_capacity(chunk.len());
            for pe in chunk {
                let weak = weak_outputs_for_pair(model, &embeddings, pe.u, pe.v, pe.layer_mask);
                let actor = snap.player_of_node(pe.u);
                let target = snap.player_of_node(pe.v);
                let row = assemble_stack_features(
                    &weak,
                    &snap.features[actor as usize],
                    &snap.features[target as usize],
                );
                let prob = predict_gbdt(&model.stacker, &row)?;
                out.push(ScoredEdge {
                    actor,
                    target,
                    prob,
                });
            }
            Ok(out)
        })
        .collect();
    let mut edges = Vec::with_capacity(pairs.len());
    for c in chunks {
        edges.extend(c?);
    }
    Ok(edges)
}
