use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::LayerGraph;
use crate::error::{Error, Result};

/// Output nonlinearity applied per head before concatenation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Linear,
    Elu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Elu => {
                if x >= 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
        }
    }

    pub(crate) fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Elu => {
                if x >= 0.0 {
                    1.0
                } else {
                    x.exp()
                }
            }
        }
    }
}

/// Parameters of one attention model: per head a linear transform and an
/// attention vector, plus the pairwise scorer mapping two embeddings to a
/// logit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GatParams {
    pub d_in: usize,
    pub d_out: usize,
    pub heads: usize,
    pub leaky_slope: f64,
    pub activation: Activation,
    /// Per head: d_out x d_in, row-major.
    pub w: Vec<Vec<f64>>,
    /// Per head: 2*d_out; first half weights the center node, second half
    /// the neighbor.
    pub a: Vec<Vec<f64>>,
    /// 2*heads*d_out pairwise weights followed by a bias term.
    pub scorer: Vec<f64>,
}

impl GatParams {
    pub fn embed_dim(&self) -> usize {
        self.heads * self.d_out
    }

    pub fn init(d_in: usize, d_out: usize, heads: usize, rng: &mut ChaCha8Rng) -> GatParams {
        let scale_w = (2.0 / (d_in + d_out) as f64).sqrt();
        let scale_a = (1.0 / d_out as f64).sqrt();
        let w = (0..heads)
            .map(|_| {
                (0..d_out * d_in)
                    .map(|_| rng.gen_range(-scale_w..scale_w))
                    .collect()
            })
            .collect();
        let a = (0..heads)
            .map(|_| {
                (0..2 * d_out)
                    .map(|_| rng.gen_range(-scale_a..scale_a))
                    .collect()
            })
            .collect();
        let embed = heads * d_out;
        let scale_s = (1.0 / embed as f64).sqrt();
        let mut scorer: Vec<f64> = (0..2 * embed)
            .map(|_| rng.gen_range(-scale_s..scale_s))
            .collect();
        scorer.push(0.0);
        GatParams {
            d_in,
            d_out,
            heads,
            leaky_slope: 0.2,
            activation: Activation::Elu,
            w,
            a,
            scorer,
        }
    }

    /// Flattens every parameter in a fixed order (heads' W row-major, heads'
    /// a, scorer last). Used by training and the gradient check.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for h in 0..self.heads {
            out.extend_from_slice(&self.w[h]);
        }
        for h in 0..self.heads {
            out.extend_from_slice(&self.a[h]);
        }
        out.extend_from_slice(&self.scorer);
        out
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        let mut pos = 0;
        for h in 0..self.heads {
            let len = self.w[h].len();
            self.w[h].copy_from_slice(&flat[pos..pos + len]);
            pos += len;
        }
        for h in 0..self.heads {
            let len = self.a[h].len();
            self.a[h].copy_from_slice(&flat[pos..pos + len]);
            pos += len;
        }
        let s_len = self.scorer.len();
        self.scorer.copy_from_slice(&flat[pos..pos + s_len]);
        pos += s_len;
        assert_eq!(pos, flat.len());
    }

    pub fn validate(&self) -> Result<()> {
        let ok_dims = self.w.len() == self.heads
            && self.a.len() == self.heads
            && self.w.iter().all(|w| w.len() == self.d_out * self.d_in)
            && self.a.iter().all(|a| a.len() == 2 * self.d_out)
            && self.scorer.len() == 2 * self.embed_dim() + 1
            && self.heads >= 1;
        if !ok_dims {
            return Err(Error::Model("inconsistent attention dimensions".into()));
        }
        if self.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite parameter".into()));
        }
        Ok(())
    }
}

/// In-neighborhood CSR over node indices 0..n; self-loops are implicit.
#[derive(Clone, Debug)]
pub struct AttentionGraph {
    pub n: usize,
    pub in_offsets: Vec<u32>,
    pub in_neighbors: Vec<u32>,
}

impl AttentionGraph {
    /// Builds the in-adjacency from a layer's directed edges, given a map
    /// from player id to node index covering every endpoint.
    pub fn from_layer(layer: &LayerGraph, index_of: &dyn Fn(u32) -> u32, n: usize) -> Self {
        let mut degree = vec![0u32; n];
        for e in &layer.edges {
            degree[index_of(e.target) as usize] += 1;
        }
        let mut in_offsets = vec![0u32; n + 1];
        for i in 0..n {
            in_offsets[i + 1] = in_offsets[i] + degree[i];
        }
        let mut cursor = in_offsets.clone();
        let mut in_neighbors = vec![0u32; layer.edges.len()];
        for e in &layer.edges {
            let t = index_of(e.target) as usize;
            in_neighbors[cursor[t] as usize] = index_of(e.actor);
            cursor[t] += 1;
        }
        AttentionGraph {
            n,
            in_offsets,
            in_neighbors,
        }
    }

    pub fn in_neighbors_of(&self, i: usize) -> &[u32] {
        &self.in_neighbors[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }

    pub fn nnz(&self) -> usize {
        self.in_neighbors.len()
    }
}

/// Intermediate state of a forward pass, kept for backprop.
pub struct ForwardTrace {
    /// Per head: transformed features t = W x, n x d_out flat.
    pub t: Vec<Vec<f64>>,
    /// Per head: center and neighbor attention scores per node.
    pub score_self: Vec<Vec<f64>>,
    pub score_nbr: Vec<Vec<f64>>,
    /// Per head: attention coefficients, per node the self entry first and
    /// then its in-neighbors in CSR order.
    pub alpha: Vec<Vec<f64>>,
    /// Per head: pre-activation aggregates, n x d_out flat.
    pub pre: Vec<Vec<f64>>,
    /// Concatenated post-activation embeddings, n x (heads*d_out) flat.
    pub embeddings: Vec<f64>,
}

fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

/// Forward pass over one layer graph. `features` is n x d_in row-major;
/// every node attends over its in-neighbors plus itself, and the attention
/// weights over each neighborhood sum to one.
pub fn gat_forward(
    graph: &AttentionGraph,
    features: &[f64],
    params: &GatParams,
) -> Result<ForwardTrace> {
    params.validate()?;
    let n = graph.n;
    if features.len() != n * params.d_in {
        return Err(Error::Model(format!(
            "feature matrix has {} values, expected {} x {}",
            features.len(),
            n,
            params.d_in
        )));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model("non-finite feature".into()));
    }
    let d_out = params.d_out;
    let embed_dim = params.embed_dim();
    let mut trace = ForwardTrace {
        t: Vec::with_capacity(params.heads),
        score_self: Vec::with_capacity(params.heads),
        score_nbr: Vec::with_capacity(params.heads),
        alpha: Vec::with_capacity(params.heads),
        pre: Vec::with_capacity(params.heads),
        embeddings: vec![0.0; n * embed_dim],
    };

    for h in 0..params.heads {
        let w = &params.w[h];
        let av = &params.a[h];
        let mut t = vec![0.0; n * d_out];
        for i in 0..n {
            let x = &features[i * params.d_in..(i + 1) * params.d_in];
            let ti = &mut t[i * d_out..(i + 1) * d_out];
            for (r, trow) in ti.iter_mut().enumerate() {
                let wrow = &w[r * params.d_in..(r + 1) * params.d_in];
                *trow = wrow.iter().zip(x).map(|(a, b)| a * b).sum();
            }
        }
        let mut score_self = vec![0.0; n];
        let mut score_nbr = vec![0.0; n];
        for i in 0..n {
            let ti = &t[i * d_out..(i + 1) * d_out];
            score_self[i] = av[..d_out].iter().zip(ti).map(|(a, b)| a * b).sum();
            score_nbr[i] = av[d_out..].iter().zip(ti).map(|(a, b)| a * b).sum();
        }

        let mut alpha = vec![0.0; n + graph.nnz()];
        let mut pre = vec![0.0; n * d_out];
        for i in 0..n {
            let nbrs = graph.in_neighbors_of(i);
            let base = graph.in_offsets[i] as usize + i;
            // logits: self first, then CSR neighbors
            let mut max_e = leaky_relu(score_self[i] + score_nbr[i], params.leaky_slope);
            for &j in nbrs {
                let e = leaky_relu(score_self[i] + score_nbr[j as usize], params.leaky_slope);
                if e > max_e {
                    max_e = e;
                }
            }
            let mut denom = 0.0;
            {
                let e = leaky_relu(score_self[i] + score_nbr[i], params.leaky_slope);
                let v = (e - max_e).exp();
                alpha[base] = v;
                denom += v;
            }
            for (k, &j) in nbrs.iter().enumerate() {
                let e = leaky_relu(score_self[i] + score_nbr[j as usize], params.leaky_slope);
                let v = (e - max_e).exp();
                alpha[base + 1 + k] = v;
                denom += v;
            }
            let pre_i = &mut pre[i * d_out..(i + 1) * d_out];
            let a_self = alpha[base] / denom;
            alpha[base] = a_self;
            for (r, p) in pre_i.iter_mut().enumerate() {
                *p = a_self * t[i * d_out + r];
            }
            for (k, &j) in nbrs.iter().enumerate() {
                let aj = alpha[base + 1 + k] / denom;
                alpha[base + 1 + k] = aj;
                let tj = &t[j as usize * d_out..(j as usize + 1) * d_out];
                for (r, p) in pre_i.iter_mut().enumerate() {
                    *p += aj * tj[r];
                }
            }
            for r in 0..d_out {
                trace.embeddings[i * embed_dim + h * d_out + r] =
                    params.activation.apply(pre_i[r]);
            }
        }
        trace.t.push(t);
        trace.score_self.push(score_self);
        trace.score_nbr.push(score_nbr);
        trace.alpha.push(alpha);
        trace.pre.push(pre);
    }
    Ok(trace)
}

/// Pairwise violation probability: logistic of the scorer applied to the
/// concatenated embeddings.
pub fn edge_probability(embed_u: &[f64], embed_v: &[f64], params: &GatParams) -> f64 {
    let d = params.embed_dim();
    debug_assert_eq!(embed_u.len(), d);
    debug_assert_eq!(embed_v.len(), d);
    let mut s = params.scorer[2 * d];
    for r in 0..d {
        s += params.scorer[r] * embed_u[r] + params.scorer[d + r] * embed_v[r];
    }
    1.0 / (1.0 + (-s).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded::{stream, StreamKind};

    fn identity_params(d: usize) -> GatParams {
        let mut w = vec![0.0; d * d];
        for i in 0..d {
            w[i * d + i] = 1.0;
        }
        GatParams {
            d_in: d,
            d_out: d,
            heads: 1,
            leaky_slope: 0.2,
            activation: Activation::Linear,
            w: vec![w],
            a: vec![vec![0.3; 2 * d]],
            scorer: vec![0.0; 2 * d + 1],
        }
    }

    fn empty_graph(n: usize) -> AttentionGraph {
        AttentionGraph {
            n,
            in_offsets: vec![0; n + 1],
            in_neighbors: vec![],
        }
    }

    #[test]
    fn isolated_node_identity_transform_returns_own_features() {
        let params = identity_params(3);
        let graph = empty_graph(1);
        let x = [0.5, -1.5, 2.0];
        let trace = gat_forward(&graph, &x, &params).unwrap();
        for (e, v) in trace.embeddings.iter().zip(&x) {
            assert!((e - v).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_nodes_get_identical_embeddings() {
        // two nodes, identical features, edges both ways
        let graph = AttentionGraph {
            n: 2,
            in_offsets: vec![0, 1, 2],
            in_neighbors: vec![1, 0],
        };
        let mut rng = stream(1, StreamKind::ModelInit, 0, 0);
        let params = GatParams::init(2, 4, 2, &mut rng);
        let x = [0.7, -0.2, 0.7, -0.2];
        let trace = gat_forward(&graph, &x, &params).unwrap();
        let d = params.embed_dim();
        for r in 0..d {
            assert!((trace.embeddings[r] - trace.embeddings[d + r]).abs() < 1e-12);
        }
    }

    #[test]
    fn attention_sums_to_one_over_each_neighborhood() {
        let graph = AttentionGraph {
            n: 3,
            in_offsets: vec![0, 2, 3, 3],
            in_neighbors: vec![1, 2, 0],
        };
        let mut rng = stream(9, StreamKind::ModelInit, 0, 0);
        let params = GatParams::init(2, 3, 2, &mut rng);
        let x = [0.1, 0.4, -0.3, 0.9, 1.2, -0.5];
        let trace = gat_forward(&graph, &x, &params).unwrap();
        for h in 0..params.heads {
            for i in 0..3 {
                let base = graph.in_offsets[i] as usize + i;
                let deg = graph.in_neighbors_of(i).len();
                let total: f64 = trace.alpha[h][base..=base + deg].iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "head {h} node {i}: {total}");
            }
        }
    }

    #[test]
    fn two_node_embedding_matches_dense_reimplementation() {
        // hand-set 2x2 transform and attention on a single directed edge
        // 1 -> 0; node 0 attends over {self, 1}, node 1 over {self}.
        let w = vec![1.0, 0.5, -0.25, 0.75];
        let a = vec![0.2, -0.4, 0.6, 0.1];
        let params = GatParams {
            d_in: 2,
            d_out: 2,
            heads: 1,
            leaky_slope: 0.2,
            activation: Activation::Linear,
            w: vec![w.clone()],
            a: vec![a.clone()],
            scorer: vec![0.0; 5],
        };
        let graph = AttentionGraph {
            n: 2,
            in_offsets: vec![0, 1, 1],
            in_neighbors: vec![1],
        };
        let x = [1.0, 2.0, -1.0, 0.5];

        // dense oracle: explicit matrices
        let wx = |xi: &[f64]| -> [f64; 2] {
            [w[0] * xi[0] + w[1] * xi[1], w[2] * xi[0] + w[3] * xi[1]]
        };
        let t0 = wx(&x[0..2]);
        let t1 = wx(&x[2..4]);
        let lrelu = |v: f64| if v >= 0.0 { v } else { 0.2 * v };
        let e = |ti: &[f64; 2], tj: &[f64; 2]| {
            lrelu(a[0] * ti[0] + a[1] * ti[1] + a[2] * tj[0] + a[3] * tj[1])
        };
        let e00 = e(&t0, &t0);
        let e01 = e(&t0, &t1);
        let z = e00.exp() + e01.exp();
        let (a00, a01) = (e00.exp() / z, e01.exp() / z);
        let want0 = [a00 * t0[0] + a01 * t1[0], a00 * t0[1] + a01 * t1[1]];
        let want1 = t1; // singleton neighborhood

        let trace = gat_forward(&graph, &x, &params).unwrap();
        assert!((trace.embeddings[0] - want0[0]).abs() < 1e-12);
        assert!((trace.embeddings[1] - want0[1]).abs() < 1e-12);
        assert!((trace.embeddings[2] - want1[0]).abs() < 1e-12);
        assert!((trace.embeddings[3] - want1[1]).abs() < 1e-12);
    }

    #[test]
    fn zero_scorer_gives_half_probability() {
        let params = identity_params(2);
        let p = edge_probability(&[1.0, 2.0], &[3.0, 4.0], &params);
        assert_eq!(p, 0.5);
    }

    #[test]
    fn large_logit_saturates() {
        let mut params = identity_params(2);
        params.scorer = vec![10.0, 10.0, 10.0, 10.0, 0.0];
        let p = edge_probability(&[1.0, 1.0], &[1.0, 1.0], &params);
        assert!(p > 0.999);
    }

    #[test]
    fn hand_set_scorer_matches_direct_logistic() {
        let mut params = identity_params(2);
        params.scorer = vec![0.5, -0.25, 0.125, 0.75, 0.1];
        let u = [1.0, 1.0];
        let v = [1.0, 1.0];
        let s = 0.5 - 0.25 + 0.125 + 0.75 + 0.1;
        let want = 1.0 / (1.0 + (-s as f64).exp());
        assert!((edge_probability(&u, &v, &params) - want).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let params = identity_params(3);
        let graph = empty_graph(2);
        assert!(gat_forward(&graph, &[1.0; 5], &params).is_err());
    }

    #[test]
    fn non_finite_feature_is_an_error() {
        let params = identity_params(2);
        let graph = empty_graph(1);
        assert!(gat_forward(&graph, &[f64::NAN, 1.0], &params).is_err());
    }
}
