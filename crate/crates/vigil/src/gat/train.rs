use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gat::model::{gat_forward, AttentionGraph, GatParams};
use crate::seeded::{stream, StreamKind};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrainHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Negatives sampled per positive when building training pairs.
    pub negative_ratio: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            learning_rate: 0.05,
            epochs: 200,
            negative_ratio: 5,
            weight_decay: 1e-4,
            seed: 7,
        }
    }
}

/// One training snapshot: a layer graph at some inference day, its node
/// features, and labeled directed pairs (node indices into the graph).
pub struct Snapshot {
    pub graph: AttentionGraph,
    /// n x d_in row-major, already normalized.
    pub features: Vec<f64>,
    pub pairs: Vec<(u32, u32, bool)>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Full-batch loss (mean binary cross-entropy over all pairs of all
/// snapshots, plus 0.5 * weight_decay * ||theta||^2) and its gradient in
/// `to_flat` order.
pub fn loss_and_gradient(
    params: &GatParams,
    snapshots: &[Snapshot],
    weight_decay: f64,
) -> Result<(f64, Vec<f64>)> {
    let d_out = params.d_out;
    let embed_dim = params.embed_dim();
    let m_total: usize = snapshots.iter().map(|s| s.pairs.len()).sum();
    if m_total == 0 {
        return Err(Error::Model("no training pairs".into()));
    }
    let inv_m = 1.0 / m_total as f64;

    let mut grad_w = vec![vec![0.0; d_out * params.d_in]; params.heads];
    let mut grad_a = vec![vec![0.0; 2 * d_out]; params.heads];
    let mut grad_scorer = vec![0.0; params.scorer.len()];
    let mut loss = 0.0;

    for snap in snapshots {
        let n = snap.graph.n;
        let trace = gat_forward(&snap.graph, &snap.features, params)?;

        // scorer forward/backward over pairs
        let mut d_embed = vec![0.0; n * embed_dim];
        for &(u, v, y) in &snap.pairs {
            let (u, v) = (u as usize, v as usize);
            let eu = &trace.embeddings[u * embed_dim..(u + 1) * embed_dim];
            let ev = &trace.embeddings[v * embed_dim..(v + 1) * embed_dim];
            let mut s = params.scorer[2 * embed_dim];
            for r in 0..embed_dim {
                s += params.scorer[r] * eu[r] + params.scorer[embed_dim + r] * ev[r];
            }
            let p = sigmoid(s);
            let pc = p.clamp(1e-15, 1.0 - 1e-15);
            loss -= inv_m * if y { pc.ln() } else { (1.0 - pc).ln() };
            let ds = (p - f64::from(y)) * inv_m;
            for r in 0..embed_dim {
                grad_scorer[r] += ds * eu[r];
                grad_scorer[embed_dim + r] += ds * ev[r];
                d_embed[u * embed_dim + r] += ds * params.scorer[r];
                d_embed[v * embed_dim + r] += ds * params.scorer[embed_dim + r];
            }
            grad_scorer[2 * embed_dim] += ds;
        }

        // attention backward, one head at a time
        for h in 0..params.heads {
            let t = &trace.t[h];
            let alpha = &trace.alpha[h];
            let pre = &trace.pre[h];
            let score_self = &trace.score_self[h];
            let score_nbr = &trace.score_nbr[h];
            let a_vec = &params.a[h];

            let mut d_t = vec![0.0; n * d_out];
            let mut d_ss = vec![0.0; n];
            let mut d_sn = vec![0.0; n];

            for i in 0..n {
                let nbrs = snap.graph.in_neighbors_of(i);
                let base = snap.graph.in_offsets[i] as usize + i;
                // dpre = d_embed (head slice) * activation'
                let mut dpre = [0.0f64; 64];
                debug_assert!(d_out <= 64);
                let mut any = false;
                for r in 0..d_out {
                    let g = d_embed[i * embed_dim + h * d_out + r]
                        * params.activation.derivative(pre[i * d_out + r]);
                    dpre[r] = g;
                    any |= g != 0.0;
                }
                if !any {
                    continue;
                }
                // d_alpha over the neighborhood, plus aggregation into d_t
                let deg = nbrs.len();
                let mut d_alpha = vec![0.0f64; deg + 1];
                {
                    let ti = &t[i * d_out..(i + 1) * d_out];
                    let mut acc = 0.0;
                    for r in 0..d_out {
                        acc += dpre[r] * ti[r];
                        d_t[i * d_out + r] += alpha[base] * dpre[r];
                    }
                    d_alpha[0] = acc;
                }
                for (k, &j) in nbrs.iter().enumerate() {
                    let tj = &t[j as usize * d_out..(j as usize + 1) * d_out];
                    let mut acc = 0.0;
                    for r in 0..d_out {
                        acc += dpre[r] * tj[r];
                        d_t[j as usize * d_out + r] += alpha[base + 1 + k] * dpre[r];
                    }
                    d_alpha[k + 1] = acc;
                }
                // softmax backward
                let mut s_dot = 0.0;
                for k in 0..=deg {
                    s_dot += alpha[base + k] * d_alpha[k];
                }
                let mut handle = |k: usize, j: usize| {
                    let de = alpha[base + k] * (d_alpha[k] - s_dot);
                    let z = score_self[i] + score_nbr[j];
                    let dz = de * if z >= 0.0 { 1.0 } else { params.leaky_slope };
                    d_ss[i] += dz;
                    d_sn[j] += dz;
                };
                handle(0, i);
                for (k, &j) in nbrs.iter().enumerate() {
                    handle(k + 1, j as usize);
                }
            }

            // scores into t and a
            for i in 0..n {
                let ti = &t[i * d_out..(i + 1) * d_out];
                for r in 0..d_out {
                    d_t[i * d_out + r] += d_ss[i] * a_vec[r] + d_sn[i] * a_vec[d_out + r];
                    grad_a[h][r] += d_ss[i] * ti[r];
                    grad_a[h][d_out + r] += d_sn[i] * ti[r];
                }
            }
            // t into W
            for i in 0..n {
                let x = &snap.features[i * params.d_in..(i + 1) * params.d_in];
                for r in 0..d_out {
                    let g = d_t[i * d_out + r];
                    if g == 0.0 {
                        continue;
                    }
                    let row = &mut grad_w[h][r * params.d_in..(r + 1) * params.d_in];
                    for (c, xv) in x.iter().enumerate() {
                        row[c] += g * xv;
                    }
                }
            }
        }
    }

    // flatten and add weight decay
    let flat_params = params.to_flat();
    let mut grad = Vec::with_capacity(flat_params.len());
    for h in 0..params.heads {
        grad.extend_from_slice(&grad_w[h]);
    }
    for h in 0..params.heads {
        grad.extend_from_slice(&grad_a[h]);
    }
    grad.extend_from_slice(&grad_scorer);
    for (g, p) in grad.iter_mut().zip(&flat_params) {
        *g += weight_decay * p;
    }
    let decay_term = 0.5 * weight_decay * flat_params.iter().map(|p| p * p).sum::<f64>();
    Ok((loss + decay_term, grad))
}

/// Trains one weak learner over several snapshots by full-batch gradient
/// descent. Returns the parameters and per-epoch loss history (initial loss
/// first, `epochs + 1` entries).
pub fn train_weak_learner_snapshots(
    snapshots: &[Snapshot],
    d_in: usize,
    d_out: usize,
    heads: usize,
    hyper: &TrainHyper,
) -> Result<(GatParams, Vec<f64>)> {
    let pos: usize = snapshots
        .iter()
        .map(|s| s.pairs.iter().filter(|p| p.2).count())
        .sum();
    let total: usize = snapshots.iter().map(|s| s.pairs.len()).sum();
    if pos == 0 || pos == total {
        return Err(Error::Model(
            "training requires at least one positive and one negative pair".into(),
        ));
    }
    let mut rng = stream(hyper.seed, StreamKind::ModelInit, d_out as u64, heads as u64);
    let mut params = GatParams::init(d_in, d_out, heads, &mut rng);
    let mut history = Vec::with_capacity(hyper.epochs + 1);
    let mut flat = params.to_flat();
    for _epoch in 0..hyper.epochs {
        let (loss, grad) = loss_and_gradient(&params, snapshots, hyper.weight_decay)?;
        history.push(loss);
        for (p, g) in flat.iter_mut().zip(&grad) {
            *p -= hyper.learning_rate * g;
        }
        params.assign_flat(&flat);
    }
    let (final_loss, _) = loss_and_gradient(&params, snapshots, hyper.weight_decay)?;
    history.push(final_loss);
    params.validate()?;
    Ok((params, history))
}

/// Single-snapshot form of the training operation.
pub fn train_weak_learner(
    graph: AttentionGraph,
    features: Vec<f64>,
    pairs: Vec<(u32, u32, bool)>,
    d_in: usize,
    d_out: usize,
    heads: usize,
    hyper: &TrainHyper,
) -> Result<(GatParams, Vec<f64>)> {
    train_weak_learner_snapshots(
        &[Snapshot {
            graph,
            features,
            pairs,
        }],
        d_in,
        d_out,
        heads,
        hyper,
    )
}
