//! Gradient-boosted tree metamodel over stacked features, trained on the
//! logistic loss with second-order (gradient/hessian) leaf estimates.

use serde::{Deserialize, Serialize};

use crate::boost::tree::{build_tree, FeatureMatrix, RegressionTree};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GbdtHyper {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    pub lambda: f64,
}

impl Default for GbdtHyper {
    fn default() -> Self {
        GbdtHyper {
            rounds: 200,
            max_depth: 4,
            learning_rate: 0.1,
            min_leaf: 20,
            lambda: 1.0,
        }
    }
}

/// Trained model: prediction = logistic(base + lr * sum of leaf values).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GbdtModel {
    pub version: u32,
    pub n_features: usize,
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_loss(logits: &[f64], labels: &[bool]) -> f64 {
    let mut sum = 0.0;
    for (&z, &y) in logits.iter().zip(labels) {
        let p = sigmoid(z).clamp(1e-15, 1.0 - 1e-15);
        sum -= if y { p.ln() } else { (1.0 - p).ln() };
    }
    sum / logits.len() as f64
}

/// Trains the boosted model. The returned loss history has `rounds + 1`
/// entries (initial loss first) and is nonincreasing: a round whose tree
/// would raise the training loss has its leaves halved until it does not
/// (dropping to a zero-contribution tree in the limit).
pub fn train_gbdt(
    rows: &FeatureMatrix,
    labels: &[bool],
    hyper: &GbdtHyper,
) -> Result<(GbdtModel, Vec<f64>)> {
    if rows.n_rows != labels.len() {
        return Err(Error::Model("row/label length mismatch".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Model(
            "training requires at least one positive and one negative row".into(),
        ));
    }
    let pos_rate = (positives as f64 / labels.len() as f64).clamp(1e-6, 1.0 - 1e-6);
    let base_score = (pos_rate / (1.0 - pos_rate)).ln();

    let presorted = rows.presort();
    let n = rows.n_rows;
    let mut logits = vec![base_score; n];
    let mut history = Vec::with_capacity(hyper.rounds + 1);
    history.push(log_loss(&logits, labels));

    let mut trees = Vec::with_capacity(hyper.rounds);
    let mut grad = vec![0.0f64; n];
    let mut hess = vec![0.0f64; n];
    for _round in 0..hyper.rounds {
        for i in 0..n {
            let p = sigmoid(logits[i]);
            grad[i] = p - f64::from(labels[i]);
            hess[i] = (p * (1.0 - p)).max(1e-12);
        }
        let (mut tree, mut row_values) = build_tree(
            rows,
            &presorted,
            &grad,
            &hess,
            hyper.max_depth,
            hyper.min_leaf,
            hyper.lambda,
        );
        let prev_loss = *history.last().unwrap();
        let mut candidate: Vec<f64> = logits
            .iter()
            .zip(&row_values)
            .map(|(z, v)| z + hyper.learning_rate * v)
            .collect();
        let mut loss = log_loss(&candidate, labels);
        let mut halvings = 0;
        while loss > prev_loss && halvings < 48 {
            tree.scale_leaves(0.5);
            for v in row_values.iter_mut() {
                *v *= 0.5;
            }
            for ((c, z), v) in candidate.iter_mut().zip(&logits).zip(&row_values) {
                *c = z + hyper.learning_rate * v;
            }
            loss = log_loss(&candidate, labels);
            halvings += 1;
        }
        if loss > prev_loss {
            tree.scale_leaves(0.0);
            candidate.copy_from_slice(&logits);
            loss = prev_loss;
        }
        logits = candidate;
        history.push(loss);
        trees.push(tree.to_preorder());
    }
    debug_assert!(history.windows(2).all(|w| w[1] <= w[0] + 1e-12));

    Ok((
        GbdtModel {
            version: 1,
            n_features: rows.n_cols,
            base_score,
            learning_rate: hyper.learning_rate,
            trees,
        },
        history,
    ))
}

/// Predicted probability for one row; errors on schema mismatch.
pub fn predict_gbdt(model: &GbdtModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.n_features {
        return Err(Error::Model(format!(
            "row has {} features, model expects {}",
            row.len(),
            model.n_features
        )));
    }
    let mut z = model.base_score;
    for tree in &model.trees {
        z += model.learning_rate * tree.predict_row(row);
    }
    Ok(sigmoid(z))
}

/// Raw logit without the logistic map (used for score diagnostics).
pub fn predict_logit(model: &GbdtModel, row: &[f64]) -> f64 {
    let mut z = model.base_score;
    for tree in &model.trees {
        z += model.learning_rate * tree.predict_row(row);
    }
    z
}

/// Flattened evaluator with a sound early exit against a logit floor.
///
/// Nodes of all trees live in contiguous arrays; `suffix_upper[k]` bounds the
/// largest possible contribution of trees `k..`, so evaluation can stop as
/// soon as a row provably cannot reach the floor. Exact for rows at or above
/// the floor; rows below report `None`.
pub struct GatedPredictor {
    base_score: f64,
    learning_rate: f64,
    n_features: usize,
    feature: Vec<u32>,
    threshold: Vec<f64>,
    /// left child; right = left + 1. Leaves store f64 value in `threshold`
    /// and u32::MAX here.
    left: Vec<u32>,
    right: Vec<u32>,
    roots: Vec<u32>,
    suffix_upper: Vec<f64>,
}

impl GatedPredictor {
    pub fn new(model: &GbdtModel) -> GatedPredictor {
        use crate::boost::tree::TreeNode;
        let mut feature = Vec::new();
        let mut threshold = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut roots = Vec::new();
        let mut tree_max = Vec::with_capacity(model.trees.len());
        for tree in &model.trees {
            let offset = feature.len() as u32;
            roots.push(offset);
            let mut max_leaf = f64::MIN;
            for node in &tree.nodes {
                match node {
                    TreeNode::Split {
                        feature: f,
                        threshold: t,
                        left: l,
                        right: r,
                    } => {
                        feature.push(*f as u32);
                        threshold.push(*t);
                        left.push(offset + *l);
                        right.push(offset + *r);
                    }
                    TreeNode::Leaf { value } => {
                        feature.push(u32::MAX);
                        threshold.push(*value);
                        left.push(u32::MAX);
                        right.push(u32::MAX);
                        max_leaf = max_leaf.max(*value);
                    }
                }
            }
            tree_max.push(max_leaf);
        }
        let mut suffix_upper = vec![0.0; model.trees.len() + 1];
        for k in (0..model.trees.len()).rev() {
            suffix_upper[k] = suffix_upper[k + 1] + model.learning_rate * tree_max[k];
        }
        GatedPredictor {
            base_score: model.base_score,
            learning_rate: model.learning_rate,
            n_features: model.n_features,
            feature,
            threshold,
            left,
            right,
            roots,
            suffix_upper,
        }
    }

    fn tree_value(&self, root: u32, row: &[f64]) -> f64 {
        let mut idx = root as usize;
        loop {
            let f = self.feature[idx];
            if f == u32::MAX {
                return self.threshold[idx];
            }
            idx = if row[f as usize] <= self.threshold[idx] {
                self.left[idx] as usize
            } else {
                self.right[idx] as usize
            };
        }
    }

    /// Probability when it can reach `prob_floor`, `None` otherwise.
    pub fn predict_if_above(&self, row: &[f64], prob_floor: f64) -> Option<f64> {
        debug_assert_eq!(row.len(), self.n_features);
        let floor_logit = (prob_floor / (1.0 - prob_floor)).ln();
        let mut z = self.base_score;
        for (k, &root) in self.roots.iter().enumerate() {
            if z + self.suffix_upper[k] < floor_logit {
                return None;
            }
            z += self.learning_rate * self.tree_value(root, row);
        }
        if z >= floor_logit {
            Some(sigmoid(z))
        } else {
            None
        }
    }

    /// Exact probability, evaluated in full.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut z = self.base_score;
        for &root in &self.roots {
            z += self.learning_rate * self.tree_value(root, row);
        }
        sigmoid(z)
    }
}
