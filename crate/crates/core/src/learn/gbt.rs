//! Gradient boosting of regression trees on the logistic loss.
//!
//! Stage `i` fits a tree `h_i` to the residuals `y - p`, finds `rho_i` by line search on
//! the loss, and adds `learning_rate * rho_i * h_i` to the margin. The stored ensemble uses
//! normalized weights `w_i = |m_i| / sum |m_j|` with `m_i = learning_rate * rho_i`; sign and
//! scale are folded into the leaf values so that `F(x) = F_0 + sum w_i f_i(x)`.

use serde::{Deserialize, Serialize};

use super::tree::split_point;
use super::{logistic_loss, sigmoid, TrainingData, TrainingSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub number_of_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf_size: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            number_of_trees: 20,
            max_depth: 10,
            learning_rate: 0.1,
            min_leaf_size: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum RegressionNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RegressionNode>,
        right: Box<RegressionNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub root: RegressionNode,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                RegressionNode::Leaf { value } => return *value,
                RegressionNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        fn walk(node: &mut RegressionNode, factor: f64) {
            match node {
                RegressionNode::Leaf { value } => *value *= factor,
                RegressionNode::Split { left, right, .. } => {
                    walk(left, factor);
                    walk(right, factor);
                }
            }
        }
        walk(&mut self.root, factor);
    }
}

fn mean(rows: &[usize], target: &[f64]) -> f64 {
    rows.iter().map(|&i| target[i]).sum::<f64>() / rows.len() as f64
}

fn grow(
    x: &[Vec<f64>],
    target: &[f64],
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> RegressionNode {
    let leaf = RegressionNode::Leaf {
        value: mean(rows, target),
    };
    if depth >= max_depth || rows.len() < 2 * min_leaf {
        return leaf;
    }
    let n = rows.len() as f64;
    let total: f64 = rows.iter().map(|&i| target[i]).sum();
    let total_sq: f64 = rows.iter().map(|&i| target[i] * target[i]).sum();
    let parent_sse = total_sq - total * total / n;
    if parent_sse <= 1e-12 {
        return leaf;
    }

    // (reduction, feature, threshold)
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x[0].len() {
        let mut sorted = rows.to_vec();
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for k in 0..sorted.len() - 1 {
            left_sum += target[sorted[k]];
            let (v, next) = (x[sorted[k]][f], x[sorted[k + 1]][f]);
            let nl = k + 1;
            let nr = sorted.len() - nl;
            if v == next || nl < min_leaf || nr < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            // SSE reduction = sum_l^2/n_l + sum_r^2/n_r - total^2/n
            let reduction = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64 - total * total / n;
            if best.is_none_or(|(r, _, _)| reduction > r) {
                best = Some((reduction, f, split_point(v, next)));
            }
        }
    }
    match best {
        Some((reduction, feature, threshold)) if reduction > 1e-12 * parent_sse.max(1.0) => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][feature] <= threshold);
            RegressionNode::Split {
                feature,
                threshold,
                left: Box::new(grow(x, target, &l, depth + 1, max_depth, min_leaf)),
                right: Box::new(grow(x, target, &r, depth + 1, max_depth, min_leaf)),
            }
        }
        _ => leaf,
    }
}

/// Least-squares regression tree on `target`; leaves hold the mean target.
pub fn fit_regression_tree(x: &[Vec<f64>], target: &[f64], max_depth: usize, min_leaf: usize) -> RegressionTree {
    let rows: Vec<usize> = (0..x.len()).collect();
    RegressionTree {
        root: grow(x, target, &rows, 0, max_depth, min_leaf.max(1)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    /// Base-rate logit.
    pub initial: f64,
    pub trees: Vec<RegressionTree>,
    pub weights: Vec<f64>,
}

impl GbtModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.initial
            + self
                .trees
                .iter()
                .zip(&self.weights)
                .map(|(t, w)| w * t.predict(x))
                .sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

/// Minimizes the logistic loss of `eta + rho * h` over `rho >= 0` by safeguarded Newton steps.
fn line_search(eta: &[f64], h: &[f64], y: &[bool]) -> f64 {
    let loss = |rho: f64| {
        let shifted: Vec<f64> = eta.iter().zip(h).map(|(e, d)| e + rho * d).collect();
        logistic_loss(&shifted, y)
    };
    let base = loss(0.0);
    let mut rho = 0.0;
    for _ in 0..100 {
        let (mut g, mut hess) = (0.0, 0.0);
        for ((e, d), &t) in eta.iter().zip(h).zip(y) {
            let p = sigmoid(e + rho * d);
            g += (p - if t { 1.0 } else { 0.0 }) * d;
            hess += p * (1.0 - p) * d * d;
        }
        if hess <= 1e-300 {
            break;
        }
        let mut step = -g / hess;
        let current = loss(rho);
        while loss((rho + step).max(0.0)) > current && step.abs() > 1e-16 {
            step *= 0.5;
        }
        let next = (rho + step).max(0.0);
        if (next - rho).abs() < 1e-12 * (1.0 + rho.abs()) {
            rho = next;
            break;
        }
        rho = next;
    }
    if loss(rho) <= base {
        rho
    } else {
        0.0
    }
}

pub fn train_gbt(data: &TrainingData, params: &GbtParams) -> (GbtModel, TrainingSummary) {
    let n = data.len();
    let rate = data.positives() as f64 / n as f64;
    let initial = (rate / (1.0 - rate)).ln();
    let mut eta = vec![initial; n];
    let mut losses = vec![logistic_loss(&eta, &data.y) / n as f64];
    let mut trees = Vec::with_capacity(params.number_of_trees);
    let mut multipliers = Vec::with_capacity(params.number_of_trees);

    for _ in 0..params.number_of_trees {
        let residuals: Vec<f64> = eta
            .iter()
            .zip(&data.y)
            .map(|(&e, &y)| if y { 1.0 } else { 0.0 } - sigmoid(e))
            .collect();
        let tree = fit_regression_tree(&data.x, &residuals, params.max_depth, params.min_leaf_size);
        let h: Vec<f64> = data.x.iter().map(|x| tree.predict(x)).collect();
        let m = params.learning_rate * line_search(&eta, &h, &data.y);
        eta.iter_mut().zip(&h).for_each(|(e, d)| *e += m * d);
        losses.push(logistic_loss(&eta, &data.y) / n as f64);
        trees.push(tree);
        multipliers.push(m);
    }

    let total: f64 = multipliers.iter().map(|m: &f64| m.abs()).sum();
    let weights: Vec<f64> = if total > 0.0 {
        multipliers.iter().map(|m| m.abs() / total).collect()
    } else {
        vec![1.0 / trees.len() as f64; trees.len()]
    };
    for ((tree, m), w) in trees.iter_mut().zip(&multipliers).zip(&weights) {
        tree.scale(if *w > 0.0 && total > 0.0 { m / w } else { 0.0 });
    }

    let summary = TrainingSummary {
        iterations: params.number_of_trees,
        converged: true,
        final_loss: losses.last().copied(),
        loss_history: losses,
        warnings: Vec::new(),
    };
    (
        GbtModel {
            initial,
            trees,
            weights,
        },
        summary,
    )
}
