//! Training stage: builds snapshots at the configured inference days,
//! trains the five weak learners and the stacked metamodel, and evaluates
//! them on the held-out window just before the trial starts.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{
    assemble_stack_features, evaluate_auc, predict_gbdt, train_gbdt, FeatureMatrix, STACK_DIM,
};
use crate::config::RunConfig;
use crate::domain::{
    DayWindow, FeatureBuilder, InteractionEvent, PlayerRecord, FEATURE_DIM, FEATURE_WINDOW_DAYS,
    LABEL_WINDOW_DAYS,
};
use crate::error::{Error, Result};
use crate::gat::{gat_forward, AttentionGraph, GatParams, Snapshot};
use crate::pipeline::risk_scores;
use crate::run::model_io::{RiskModel, MODEL_VERSION};
use crate::run::scoring::{build_window_snapshot, pair_universe, WindowSnapshot};
use crate::seeded::{stream, StreamKind};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainReport {
    pub weak_train_auc: Vec<f64>,
    pub stacked_train_auc: f64,
    pub weak_holdout_auc: Vec<f64>,
    pub stacked_holdout_auc: f64,
    pub player_violator_auc: f64,
    pub player_victim_auc: f64,
    pub median_edge_prob: f64,
    pub p99_edge_prob: f64,
    pub share_above_threshold: f64,
    pub train_rows: usize,
    pub train_positives: usize,
    pub holdout_pairs: usize,
    pub holdout_positives: usize,
    pub gbdt_loss_first: f64,
    pub gbdt_loss_last: f64,
}

/// Directed violating pairs (node indices) in the 7 days before `day`.
fn violating_pairs(
    events_by_day: &[Vec<InteractionEvent>],
    snap: &WindowSnapshot,
    day: u32,
) -> Vec<(u32, u32)> {
    let lo = day - LABEL_WINDOW_DAYS;
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for d in lo..day {
        for ev in &events_by_day[d as usize] {
            if ev.violation {
                if let (Some(u), Some(v)) = (snap.node_index(ev.actor), snap.node_index(ev.target))
                {
                    pairs.push((u, v));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Sorted node-index edge lists per layer.
fn layer_edge_lists(snap: &WindowSnapshot) -> Vec<Vec<(u32, u32)>> {
    snap.graph
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
        .collect()
}

/// Uniform sample (without replacement) of up to `count` entries from
/// `pool`, excluding indices whose pair is in `exclude`.
fn sample_negatives(
    pool: &[(u32, u32)],
    exclude: &HashSet<(u32, u32)>,
    count: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<(u32, u32)> {
    let mut picked = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let max_attempts = count.saturating_mul(20).max(1024);
    while out.len() < count && attempts < max_attempts && picked.len() < pool.len() {
        attempts += 1;
        let i = rng.gen_range(0..pool.len());
        if picked.insert(i) && !exclude.contains(&pool[i]) {
            out.push(pool[i]);
        }
    }
    out
}

struct NormStats {
    mean: Vec<f64>,
    std: Vec<f64>,
}

fn normalization_stats(snaps: &[WindowSnapshot]) -> NormStats {
    let mut count = 0usize;
    let mut mean = vec![0.0; FEATURE_DIM];
    for s in snaps {
        for &p in &s.graph.nodes {
            let row = s.features[p as usize].to_array();
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
            count += 1;
        }
    }
    let count = count.max(1) as f64;
    for m in mean.iter_mut() {
        *m /= count;
    }
    let mut var = vec![0.0; FEATURE_DIM];
    for s in snaps {
        for &p in &s.graph.nodes {
            let row = s.features[p as usize].to_array();
            for (i, v) in row.into_iter().enumerate() {
                var[i] += (v - mean[i]) * (v - mean[i]);
            }
        }
    }
    let std = var
        .into_iter()
        .map(|v| {
            let s = (v / count).sqrt();
            if s < 1e-9 {
                1.0
            } else {
                s
            }
        })
        .collect();
    NormStats { mean, std }
}

fn normalized_matrix(snap: &WindowSnapshot, norm: &NormStats) -> Vec<f64> {
    let n = snap.node_count();
    let mut out = vec![0.0; n * FEATURE_DIM];
    for (i, &p) in snap.graph.nodes.iter().enumerate() {
        let raw = snap.features[p as usize].to_array();
        for d in 0..FEATURE_DIM {
            out[i * FEATURE_DIM + d] = (raw[d] - norm.mean[d]) / norm.std[d];
        }
    }
    out
}

/// Embeddings for every layer of one snapshot under the given weak learners.
fn embeddings_for(
    layer_models: &[GatParams],
    snap: &WindowSnapshot,
    node_features: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = snap.node_count();
    layer_models
        .iter()
        .enumerate()
        .map(|(li, params)| {
            let graph = AttentionGraph::from_layer(
                &snap.graph.layers[li],
                &|p| snap.node_index(p).expect("endpoint in node set"),
                n,
            );
            Ok(gat_forward(&graph, node_features, params)?.embeddings)
        })
        .collect()
}

fn weak_probs_for(
    layer_models: &[GatParams],
    embeddings: &[Vec<f64>],
    edge_lists: &[Vec<(u32, u32)>],
    u: u32,
    v: u32,
) -> crate::boost::WeakOutputs {
    let mut weak = crate::boost::WeakOutputs::default();
    for li in 0..5 {
        if edge_lists[li].binary_search(&(u, v)).is_ok() {
            let params = &layer_models[li];
            let d = params.embed_dim();
            let eu = &embeddings[li][u as usize * d..(u as usize + 1) * d];
            let ev = &embeddings[li][v as usize * d..(v as usize + 1) * d];
            weak.probs[li] = Some(crate::gat::edge_probability(eu, ev, params));
        }
    }
    weak
}

/// Trains the full risk model from burn-in events.
pub fn train_model(
    cfg: &RunConfig,
    events_by_day: &[Vec<InteractionEvent>],
    players: &[PlayerRecord],
) -> Result<(RiskModel, TrainReport)> {
    let n_players = players.len();
    let mut builder = FeatureBuilder::new(n_players);
    for (day, evs) in events_by_day.iter().enumerate() {
        builder.ingest_day(day as u32, evs);
    }

    let train_days = cfg.train_inference_days();
    let snaps: Vec<WindowSnapshot> = train_days
        .iter()
        .map(|&d| {
            let window = DayWindow::feature_window(d, FEATURE_WINDOW_DAYS)?;
            Ok(build_window_snapshot(events_by_day, window, players, &builder))
        })
        .collect::<Result<_>>()?;
    let norm = normalization_stats(&snaps);

    let node_features: Vec<Vec<f64>> = snaps.iter().map(|s| normalized_matrix(s, &norm)).collect();
    let positives_by_day: Vec<Vec<(u32, u32)>> = snaps
        .iter()
        .zip(&train_days)
        .map(|(s, &d)| violating_pairs(events_by_day, s, d))
        .collect();
    let total_positives: usize = positives_by_day.iter().map(|p| p.len()).sum();
    if total_positives == 0 {
        return Err(Error::Model(
            "no violating pairs in the training windows; the generator needs a longer burn-in or higher hazard".into(),
        ));
    }
    let edge_lists_by_day: Vec<Vec<Vec<(u32, u32)>>> =
        snaps.iter().map(layer_edge_lists).collect();

    let gat_hyper = cfg.model.gat.hyper();
    let heads = cfg.model.gat.heads;
    let d_out = cfg.model.gat.d_out;

    // one weak learner per layer, trained on its own per-day snapshots
    let layer_models: Vec<GatParams> = (0..5usize)
        .into_par_iter()
        .map(|li| -> Result<GatParams> {
            let mut snapshots: Vec<Snapshot> = Vec::new();
            for (di, snap) in snaps.iter().enumerate() {
                let positives = &positives_by_day[di];
                let exclude: HashSet<(u32, u32)> = positives.iter().copied().collect();
                let mut rng = stream(
                    gat_hyper.seed,
                    StreamKind::NegativeSampling,
                    li as u64,
                    train_days[di] as u64,
                );
                let negatives = sample_negatives(
                    &edge_lists_by_day[di][li],
                    &exclude,
                    positives.len() * gat_hyper.negative_ratio,
                    &mut rng,
                );
                let mut pairs: Vec<(u32, u32, bool)> =
                    positives.iter().map(|&(u, v)| (u, v, true)).collect();
                pairs.extend(negatives.into_iter().map(|(u, v)| (u, v, false)));
                let graph = AttentionGraph::from_layer(
                    &snap.graph.layers[li],
                    &|p| snap.node_index(p).expect("endpoint in node set"),
                    snap.node_count(),
                );
                snapshots.push(Snapshot {
                    graph,
                    features: node_features[di].clone(),
                    pairs,
                });
            }
            let (params, _history) = crate::gat::train_weak_learner_snapshots(
                &snapshots,
                FEATURE_DIM,
                d_out,
                heads,
                &gat_hyper,
            )?;
            Ok(params)
        })
        .collect::<Result<_>>()?;

    // stacked training rows over the union pair universe
    let mut rows = FeatureMatrix::new(STACK_DIM);
    let mut labels: Vec<bool> = Vec::new();
    for (di, snap) in snaps.iter().enumerate() {
        let embeddings = embeddings_for(&layer_models, snap, &node_features[di])?;
        let positives = &positives_by_day[di];
        let exclude: HashSet<(u32, u32)> = positives.iter().copied().collect();
        let universe: Vec<(u32, u32)> = pair_universe(snap)
            .into_iter()
            .map(|pe| (pe.u, pe.v))
            .collect();
        let mut rng = stream(
            gat_hyper.seed,
            StreamKind::NegativeSampling,
            97,
            train_days[di] as u64,
        );
        let negatives = sample_negatives(
            &universe,
            &exclude,
            positives.len() * cfg.model.gbdt.negative_ratio,
            &mut rng,
        );
        for (&(u, v), y) in positives
            .iter()
            .map(|p| (p, true))
            .chain(negatives.iter().map(|p| (p, false)))
        {
            let weak = weak_probs_for(&layer_models, &embeddings, &edge_lists_by_day[di], u, v);
            let row = assemble_stack_features(
                &weak,
                &snap.features[snap.player_of_node(u) as usize],
                &snap.features[snap.player_of_node(v) as usize],
            );
            rows.push_row(&row);
            labels.push(y);
        }
    }

    let (stacker, history) = train_gbdt(&rows, &labels, &cfg.model.gbdt.hyper())?;

    // training-split AUCs and the stacking-dominance contract
    let train_preds: Vec<f64> = (0..rows.n_rows)
        .map(|i| predict_gbdt(&stacker, rows.row(i)))
        .collect::<Result<_>>()?;
    let stacked_train_auc = evaluate_auc(&train_preds, &labels)?;
    let mut weak_train_auc = Vec::with_capacity(5);
    for li in 0..5 {
        let col: Vec<f64> = (0..rows.n_rows).map(|i| rows.row(i)[li]).collect();
        weak_train_auc.push(evaluate_auc(&col, &labels)?);
    }
    let best_weak = weak_train_auc.iter().cloned().fold(f64::MIN, f64::max);
    if stacked_train_auc + 0.01 < best_weak {
        return Err(Error::Model(format!(
            "stacking dominance violated on the training split: stacked {stacked_train_auc:.4} vs best weak {best_weak:.4}"
        )));
    }

    let model = RiskModel {
        version: MODEL_VERSION,
        config_hash: cfg.hash(),
        feature_mean: norm.mean,
        feature_std: norm.std,
        layer_models,
        stacker,
    };

    let eval = evaluate_holdout(cfg, events_by_day, players, &builder, &model)?;
    let report = TrainReport {
        weak_train_auc,
        stacked_train_auc,
        weak_holdout_auc: eval.weak_auc,
        stacked_holdout_auc: eval.stacked_auc,
        player_violator_auc: eval.player_violator_auc,
        player_victim_auc: eval.player_victim_auc,
        median_edge_prob: eval.median_edge_prob,
        p99_edge_prob: eval.p99_edge_prob,
        share_above_threshold: eval.share_above_threshold,
        train_rows: rows.n_rows,
        train_positives: labels.iter().filter(|&&y| y).count(),
        holdout_pairs: eval.pairs,
        holdout_positives: eval.positives,
        gbdt_loss_first: *history.first().unwrap(),
        gbdt_loss_last: *history.last().unwrap(),
    };
    Ok((model, report))
}

struct HoldoutEval {
    weak_auc: Vec<f64>,
    stacked_auc: f64,
    player_violator_auc: f64,
    player_victim_auc: f64,
    median_edge_prob: f64,
    p99_edge_prob: f64,
    share_above_threshold: f64,
    pairs: usize,
    positives: usize,
}

/// Held-out evaluation at the trial-start inference day: the label window
/// `[start-7, start-1]` is disjoint from all training label windows.
fn evaluate_holdout(
    cfg: &RunConfig,
    events_by_day: &[Vec<InteractionEvent>],
    players: &[PlayerRecord],
    builder: &FeatureBuilder,
    model: &RiskModel,
) -> Result<HoldoutEval> {
    let eval_day = cfg.eval_inference_day();
    let window = DayWindow::feature_window(eval_day, FEATURE_WINDOW_DAYS)?;
    let snap = build_window_snapshot(events_by_day, window, players, builder);
    let node_features = snap.normalized_node_matrix(model);
    let embeddings = embeddings_for(&model.layer_models, &snap, &node_features)?;
    let positives: HashSet<(u32, u32)> = violating_pairs(events_by_day, &snap, eval_day)
        .into_iter()
        .collect();
    let universe = pair_universe(&snap);

    let results: Vec<(f64, [f64; 5], bool, u32, u32)> = universe
        .par_chunks(2048)
        .map(|chunk| -> Result<Vec<(f64, [f64; 5], bool, u32, u32)>> {
            let mut out = Vec::with_capacity(chunk.len());
            for pe in chunk {
                let weak = crate::run::scoring::weak_outputs_for_pair(
                    model,
                    &embeddings,
                    pe.u,
                    pe.v,
                    pe.layer_mask,
                );
                let actor = snap.player_of_node(pe.u);
                let target = snap.player_of_node(pe.v);
                let row = assemble_stack_features(
                    &weak,
                    &snap.features[actor as usize],
                    &snap.features[target as usize],
                );
                let p = predict_gbdt(&model.stacker, &row)?;
                let mut weak_arr = [0.0; 5];
                for li in 0..5 {
                    weak_arr[li] = weak.probs[li].unwrap_or(0.0);
                }
                out.push((p, weak_arr, positives.contains(&(pe.u, pe.v)), pe.u, pe.v));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let scores: Vec<f64> = results.iter().map(|r| r.0).collect();
    let labels: Vec<bool> = results.iter().map(|r| r.2).collect();
    let stacked_auc = evaluate_auc(&scores, &labels)?;
    let mut weak_auc = Vec::with_capacity(5);
    for li in 0..5 {
        let col: Vec<f64> = results.iter().map(|r| r.1[li]).collect();
        weak_auc.push(evaluate_auc(&col, &labels)?);
    }

    // score-distribution calibration: median, p99, share above threshold
    let mut sorted = scores.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median_edge_prob = sorted[sorted.len() / 2];
    let p99_edge_prob = sorted[((sorted.len() as f64 * 0.99) as usize).min(sorted.len() - 1)];
    let share_above_threshold = sorted
        .iter()
        .filter(|&&s| s > cfg.pipeline.threshold)
        .count() as f64
        / sorted.len() as f64;

    // player-level AUC via risk scores against player-level labels
    let edges: Vec<crate::pipeline::ScoredEdge> = results
        .iter()
        .map(|r| crate::pipeline::ScoredEdge {
            actor: snap.player_of_node(r.3),
            target: snap.player_of_node(r.4),
            prob: r.0,
        })
        .collect();
    let assessment = risk_scores(eval_day, players.len(), &edges, cfg.pipeline.threshold)?;
    let mut violated_out = vec![false; players.len()];
    let mut violated_in = vec![false; players.len()];
    for d in eval_day - LABEL_WINDOW_DAYS..eval_day {
        for ev in &events_by_day[d as usize] {
            if ev.violation {
                violated_out[ev.actor as usize] = true;
                violated_in[ev.target as usize] = true;
            }
        }
    }
    // restrict to window-active players
    let active: Vec<usize> = snap.graph.nodes.iter().map(|&p| p as usize).collect();
    let va: Vec<f64> = active.iter().map(|&i| assessment.violator[i]).collect();
    let vl: Vec<bool> = active.iter().map(|&i| violated_out[i]).collect();
    let ta: Vec<f64> = active.iter().map(|&i| assessment.victim[i]).collect();
    let tl: Vec<bool> = active.iter().map(|&i| violated_in[i]).collect();
    let player_violator_auc = evaluate_auc(&va, &vl)?;
    let player_victim_auc = evaluate_auc(&ta, &tl)?;

    Ok(HoldoutEval {
        weak_auc,
        stacked_auc,
        player_violator_auc,
        player_victim_auc,
        median_edge_prob,
        p99_edge_prob,
        share_above_threshold,
        pairs: results.len(),
        positives: labels.iter().filter(|&&y| y).count(),
    })
}
