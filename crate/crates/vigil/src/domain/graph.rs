use std::collections::HashMap;

use crate::domain::{Day, InteractionEvent, Layer, PlayerId, LAYERS};
use crate::error::{Error, Result};

/// Inclusive day range `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DayWindow {
    pub start: Day,
    pub end: Day,
}

impl DayWindow {
    pub fn new(start: Day, end: Day) -> Result<DayWindow> {
        if end < start {
            return Err(Error::Domain(format!("empty window [{start}, {end}]")));
        }
        Ok(DayWindow { start, end })
    }

    /// The feature window ending the day before `inference_day`.
    pub fn feature_window(inference_day: Day, length: u32) -> Result<DayWindow> {
        if inference_day < length {
            return Err(Error::Domain(format!(
                "inference day {inference_day} lacks a full {length}-day window"
            )));
        }
        DayWindow::new(inference_day - length, inference_day - 1)
    }

    pub fn contains(&self, day: Day) -> bool {
        day >= self.start && day <= self.end
    }

    pub fn len_days(&self) -> u32 {
        self.end - self.start + 1
    }
}

/// Directed edge with its in-window event count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub actor: PlayerId,
    pub target: PlayerId,
    pub weight: u32,
}

/// One layer's deduplicated directed edges, sorted by (actor, target).
#[derive(Clone, Debug, Default)]
pub struct LayerGraph {
    pub edges: Vec<Edge>,
}

impl LayerGraph {
    pub fn weight_sum(&self) -> u64 {
        self.edges.iter().map(|e| e.weight as u64).sum()
    }
}

/// Five directed weighted layers over a shared node set, built from the
/// events of one feature window.
#[derive(Clone, Debug)]
pub struct MultiplexGraph {
    /// Sorted ids of players appearing as an endpoint in the window.
    pub nodes: Vec<PlayerId>,
    pub layers: [LayerGraph; 5],
    pub window: DayWindow,
}

impl MultiplexGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn layer(&self, layer: Layer) -> &LayerGraph {
        &self.layers[layer.index()]
    }

    /// Total event count represented by the graph.
    pub fn total_weight(&self) -> u64 {
        self.layers.iter().map(|l| l.weight_sum()).sum()
    }
}

/// Builds the windowed multiplex graph: one edge per (layer, actor, target)
/// with weight equal to the event count in the window.
pub fn build_multiplex_graph(events: &[InteractionEvent], window: DayWindow) -> MultiplexGraph {
    let mut per_layer: [HashMap<(PlayerId, PlayerId), u32>; 5] = Default::default();
    for ev in events {
        if !window.contains(ev.day) {
            continue;
        }
        *per_layer[ev.layer.index()]
            .entry((ev.actor, ev.target))
            .or_insert(0) += 1;
    }

    let mut nodes: Vec<PlayerId> = Vec::new();
    let mut layers: [LayerGraph; 5] = Default::default();
    for layer in LAYERS {
        let map = std::mem::take(&mut per_layer[layer.index()]);
        let mut edges: Vec<Edge> = map
            .into_iter()
            .map(|((actor, target), weight)| Edge {
                actor,
                target,
                weight,
            })
            .collect();
        edges.sort_unstable_by_key(|e| (e.actor, e.target));
        for e in &edges {
            nodes.push(e.actor);
            nodes.push(e.target);
        }
        layers[layer.index()] = LayerGraph { edges };
    }
    nodes.sort_unstable();
    nodes.dedup();

    MultiplexGraph {
        nodes,
        layers,
        window,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(day: Day, layer: Layer, actor: PlayerId, target: PlayerId) -> InteractionEvent {
        InteractionEvent {
            day,
            hour: 12,
            layer,
            actor,
            target,
            violation: false,
        }
    }

    #[test]
    fn dm_events_aggregate_into_one_weighted_edge() {
        let events = vec![
            ev(3, Layer::Dm, 1, 2),
            ev(4, Layer::Dm, 1, 2),
            ev(5, Layer::Dm, 1, 2),
        ];
        let g = build_multiplex_graph(&events, DayWindow::new(0, 13).unwrap());
        let dm = g.layer(Layer::Dm);
        assert_eq!(dm.edges, vec![Edge { actor: 1, target: 2, weight: 3 }]);
        assert_eq!(g.nodes, vec![1, 2]);
    }

    #[test]
    fn ac_edge_runs_speaker_to_room_owner() {
        // The generator emits AC events with actor = speaker, target = owner;
        // the graph keeps that direction.
        let events = vec![ev(0, Layer::Ac, 9, 4)];
        let g = build_multiplex_graph(&events, DayWindow::new(0, 0).unwrap());
        assert_eq!(g.layer(Layer::Ac).edges[0].actor, 9);
        assert_eq!(g.layer(Layer::Ac).edges[0].target, 4);
    }

    #[test]
    fn no_events_yields_empty_node_set() {
        let g = build_multiplex_graph(&[], DayWindow::new(0, 13).unwrap());
        assert!(g.nodes.is_empty());
        assert_eq!(g.total_weight(), 0);
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(DayWindow::new(5, 4).is_err());
    }

    #[test]
    fn weight_sum_matches_in_window_event_count() {
        let mut events = Vec::new();
        for d in 0..20u32 {
            events.push(ev(d, LAYERS[(d % 5) as usize], d % 7, (d % 7) + 1));
        }
        let window = DayWindow::new(3, 16).unwrap();
        let g = build_multiplex_graph(&events, window);
        let expected = events.iter().filter(|e| window.contains(e.day)).count() as u64;
        assert_eq!(g.total_weight(), expected);
    }

    #[test]
    fn rebuild_is_identical() {
        let events: Vec<_> = (0..200u32)
            .map(|i| ev(i % 14, LAYERS[(i % 5) as usize], i % 11, (i % 11) + 1 + i % 3))
            .collect();
        let w = DayWindow::new(0, 13).unwrap();
        let a = build_multiplex_graph(&events, w);
        let b = build_multiplex_graph(&events, w);
        assert_eq!(a.nodes, b.nodes);
        for l in LAYERS {
            assert_eq!(a.layer(l).edges, b.layer(l).edges);
        }
    }
}
