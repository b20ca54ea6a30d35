//! Depth-bounded regression trees fit to gradient/hessian targets with
//! exact sorted-scan split finding.

use serde::{Deserialize, Serialize};

/// Tree nodes in preorder; children referenced by index.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn scale_leaves(&mut self, factor: f64) {
        for node in &mut self.nodes {
            if let TreeNode::Leaf { value } = node {
                *value *= factor;
            }
        }
    }

    pub fn is_well_formed(&self) -> bool {
        // every child index in range and strictly after its parent
        self.nodes.iter().enumerate().all(|(i, n)| match n {
            TreeNode::Leaf { .. } => true,
            TreeNode::Split { left, right, .. } => {
                (*left as usize) > i
                    && (*right as usize) > i
                    && (*left as usize) < self.nodes.len()
                    && (*right as usize) < self.nodes.len()
            }
        })
    }

    /// Same tree with nodes stored in preorder (the serialized layout).
    pub fn to_preorder(&self) -> RegressionTree {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        self.copy_preorder(0, &mut nodes);
        let tree = RegressionTree { nodes };
        debug_assert!(tree.is_well_formed());
        tree
    }

    fn copy_preorder(&self, idx: usize, out: &mut Vec<TreeNode>) -> u32 {
        let slot = out.len() as u32;
        match self.nodes[idx] {
            TreeNode::Leaf { value } => out.push(TreeNode::Leaf { value }),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                out.push(TreeNode::Leaf { value: 0.0 }); // placeholder
                let l = self.copy_preorder(left as usize, out);
                let r = self.copy_preorder(right as usize, out);
                out[slot as usize] = TreeNode::Split {
                    feature,
                    threshold,
                    left: l,
                    right: r,
                };
            }
        }
        slot
    }
}

/// Row-major feature matrix.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    pub data: Vec<f64>,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl FeatureMatrix {
    pub fn new(n_cols: usize) -> Self {
        FeatureMatrix {
            data: Vec::new(),
            n_rows: 0,
            n_cols,
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.n_cols);
        self.data.extend_from_slice(row);
        self.n_rows += 1;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    /// Per-feature row indices sorted ascending by feature value.
    pub fn presort(&self) -> Vec<Vec<u32>> {
        (0..self.n_cols)
            .map(|c| {
                let mut idx: Vec<u32> = (0..self.n_rows as u32).collect();
                idx.sort_by(|&a, &b| {
                    self.value(a as usize, c)
                        .partial_cmp(&self.value(b as usize, c))
                        .unwrap()
                });
                idx
            })
            .collect()
    }
}

/// Split gain bookkeeping. `score(G, H) = G^2 / (H + lambda)`; the gain of a
/// split is `score_l + score_r - score_parent`.
pub fn split_score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Newton leaf value, clipped so a single tree cannot swing a logit by more
/// than `LEAF_CLIP`.
pub const LEAF_CLIP: f64 = 4.0;

pub fn leaf_value(g: f64, h: f64, lambda: f64) -> f64 {
    (-g / (h + lambda)).clamp(-LEAF_CLIP, LEAF_CLIP)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestSplit {
    pub gain: f64,
    pub feature: usize,
    pub threshold: f64,
}

struct FrontierNode {
    arena_idx: usize,
    g: f64,
    h: f64,
    count: usize,
}

/// Builds one tree on gradient/hessian targets. Level-wise growth to
/// `max_depth`; only splits with positive gain and both children holding at
/// least `min_leaf` rows are taken. Ties prefer the lowest feature index,
/// then the lowest threshold (the scan visits candidates in that order and
/// replaces only on strictly larger gain).
///
/// Returns the tree and each row's leaf value.
pub fn build_tree(
    matrix: &FeatureMatrix,
    presorted: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    max_depth: usize,
    min_leaf: usize,
    lambda: f64,
) -> (RegressionTree, Vec<f64>) {
    let n = matrix.n_rows;
    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { value: 0.0 }];
    // row -> frontier slot (usize::MAX = settled in a leaf)
    let mut slot: Vec<u32> = vec![0; n];
    let g_total: f64 = grad.iter().sum();
    let h_total: f64 = hess.iter().sum();
    let mut frontier = vec![FrontierNode {
        arena_idx: 0,
        g: g_total,
        h: h_total,
        count: n,
    }];

    for _depth in 0..max_depth {
        if frontier.is_empty() {
            break;
        }
        let best = best_splits_for_frontier(
            matrix, presorted, grad, hess, &slot, &frontier, min_leaf, lambda,
        );

        let mut next_frontier: Vec<FrontierNode> = Vec::new();
        // frontier slot -> (feature, threshold, left slot base) for splitters
        let mut split_of: Vec<Option<(usize, f64, u32)>> = vec![None; frontier.len()];
        for (fi, node) in frontier.iter().enumerate() {
            match best[fi] {
                Some(b) if b.gain > 0.0 => {
                    let left_idx = nodes.len();
                    nodes.push(TreeNode::Leaf { value: 0.0 });
                    let right_idx = nodes.len();
                    nodes.push(TreeNode::Leaf { value: 0.0 });
                    nodes[node.arena_idx] = TreeNode::Split {
                        feature: b.feature,
                        threshold: b.threshold,
                        left: left_idx as u32,
                        right: right_idx as u32,
                    };
                    let next_slot = next_frontier.len() as u32;
                    split_of[fi] = Some((b.feature, b.threshold, next_slot));
                    next_frontier.push(FrontierNode {
                        arena_idx: left_idx,
                        g: 0.0,
                        h: 0.0,
                        count: 0,
                    });
                    next_frontier.push(FrontierNode {
                        arena_idx: right_idx,
                        g: 0.0,
                        h: 0.0,
                        count: 0,
                    });
                }
                _ => {
                    // becomes a leaf
                    nodes[node.arena_idx] = TreeNode::Leaf {
                        value: leaf_value(node.g, node.h, lambda),
                    };
                }
            }
        }
        // reassign rows
        for r in 0..n {
            let s = slot[r];
            if s == u32::MAX {
                continue;
            }
            match split_of[s as usize] {
                Some((feature, threshold, base)) => {
                    let side = if matrix.value(r, feature) <= threshold {
                        0
                    } else {
                        1
                    };
                    let ns = base + side;
                    slot[r] = ns;
                    let fnode = &mut next_frontier[ns as usize];
                    fnode.g += grad[r];
                    fnode.h += hess[r];
                    fnode.count += 1;
                }
                None => slot[r] = u32::MAX,
            }
        }
        frontier = next_frontier;
    }

    // settle remaining frontier nodes as leaves
    for node in &frontier {
        nodes[node.arena_idx] = TreeNode::Leaf {
            value: leaf_value(node.g, node.h, lambda),
        };
    }

    let tree = RegressionTree { nodes };
    debug_assert!(tree.is_well_formed());
    let row_values: Vec<f64> = (0..n).map(|r| tree.predict_row(matrix.row(r))).collect();
    (tree, row_values)
}

/// Best split per frontier node: one running scan per feature over the
/// presorted order, accumulating per-node prefix sums.
#[allow(clippy::too_many_arguments)]
fn best_splits_for_frontier(
    matrix: &FeatureMatrix,
    presorted: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    slot: &[u32],
    frontier: &[FrontierNode],
    min_leaf: usize,
    lambda: f64,
) -> Vec<Option<BestSplit>> {
    let k = frontier.len();
    let mut best: Vec<Option<BestSplit>> = vec![None; k];
    let mut gl = vec![0.0f64; k];
    let mut hl = vec![0.0f64; k];
    let mut cl = vec![0usize; k];
    let mut last_val = vec![f64::NAN; k];

    for (feature, order) in presorted.iter().enumerate() {
        for v in gl.iter_mut() {
            *v = 0.0;
        }
        for v in hl.iter_mut() {
            *v = 0.0;
        }
        for v in cl.iter_mut() {
            *v = 0;
        }
        for v in last_val.iter_mut() {
            *v = f64::NAN;
        }
        for &r in order {
            let r = r as usize;
            let s = slot[r];
            if s == u32::MAX {
                continue;
            }
            let s = s as usize;
            let value = matrix.value(r, feature);
            let node = &frontier[s];
            // candidate boundary before this row, if the value changed
            if cl[s] > 0 && value > last_val[s] {
                let threshold = 0.5 * (last_val[s] + value);
                // midpoint must strictly separate the two values
                if threshold > last_val[s] && threshold < value {
                    let count_r = node.count - cl[s];
                    if cl[s] >= min_leaf && count_r >= min_leaf {
                        let gr = node.g - gl[s];
                        let hr = node.h - hl[s];
                        let gain = split_score(gl[s], hl[s], lambda)
                            + split_score(gr, hr, lambda)
                            - split_score(node.g, node.h, lambda);
                        let better = match best[s] {
                            None => gain > 0.0,
                            Some(b) => gain > b.gain,
                        };
                        if better {
                            best[s] = Some(BestSplit {
                                gain,
                                feature,
                                threshold,
                            });
                        }
                    }
                }
            }
            gl[s] += grad[r];
            hl[s] += hess[r];
            cl[s] += 1;
            last_val[s] = value;
        }
    }
    best
}
