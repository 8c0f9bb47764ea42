//! C4.5-style classification tree on numeric features.
//!
//! Binary splits `x[f] <= t`, where `t` is always a training value, so any strictly
//! increasing transform of a column leaves the fitted partition unchanged.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use super::TrainingData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    GainRatio,
    InformationGain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: usize,
    /// Confidence level of the pessimistic error estimate used for pruning.
    pub confidence: f64,
    /// A node is split only if the best criterion value reaches this.
    pub minimal_gain: f64,
    pub min_leaf_size: usize,
    pub min_split_size: usize,
    pub apply_pruning: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            criterion: Criterion::GainRatio,
            max_depth: 20,
            confidence: 0.1,
            minimal_gain: 0.05,
            min_leaf_size: 2,
            min_split_size: 4,
            apply_pruning: true,
        }
    }
}

/// `counts` is `[non-influencer, influencer]` over the training rows reaching the node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        counts: [usize; 2],
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn counts(&self) -> [usize; 2] {
        match self {
            TreeNode::Leaf { counts } | TreeNode::Split { counts, .. } => *counts,
        }
    }

    fn leaf_for(&self, x: &[f64]) -> [usize; 2] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { counts } => return *counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
}

impl TreeModel {
    /// Share of influencers in the leaf reached by `x`.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let [neg, pos] = self.root.leaf_for(x);
        pos as f64 / (neg + pos).max(1) as f64
    }

    /// Majority class of the leaf; ties go to the influencer class.
    pub fn vote(&self, x: &[f64]) -> bool {
        let [neg, pos] = self.root.leaf_for(x);
        pos >= neg
    }
}

fn entropy(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Midpoint between two adjacent distinct training values, never reaching `next`.
pub(crate) fn split_point(v: f64, next: f64) -> f64 {
    let t = v + (next - v) / 2.0;
    if t < next {
        t
    } else {
        v
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    ratio: f64,
}

/// Best threshold of one feature by information gain. Ties keep the lowest threshold.
fn best_threshold(x: &[Vec<f64>], y: &[bool], rows: &[usize], feature: usize, min_leaf: usize) -> Option<Candidate> {
    let mut sorted: Vec<usize> = rows.to_vec();
    sorted.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
    let n = sorted.len();
    let mut total = [0usize; 2];
    for &i in &sorted {
        total[y[i] as usize] += 1;
    }
    let parent = entropy(total);
    let mut left = [0usize; 2];
    let mut best: Option<Candidate> = None;
    for k in 0..n - 1 {
        left[y[sorted[k]] as usize] += 1;
        let (v, next) = (x[sorted[k]][feature], x[sorted[k + 1]][feature]);
        if v == next {
            continue;
        }
        let nl = k + 1;
        let nr = n - nl;
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let (wl, wr) = (nl as f64 / n as f64, nr as f64 / n as f64);
        let gain = parent - wl * entropy(left) - wr * entropy(right);
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let split_info = -(wl * wl.log2() + wr * wr.log2());
            best = Some(Candidate {
                feature,
                threshold: split_point(v, next),
                gain,
                ratio: if split_info > 0.0 { gain / split_info } else { 0.0 },
            });
        }
    }
    best
}

pub(crate) struct FeatureSampler<'a, R: Rng> {
    pub rng: &'a mut R,
    pub per_split: usize,
}

struct Builder<'a, 'r, R: Rng> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    params: &'a TreeParams,
    sampler: Option<FeatureSampler<'r, R>>,
}

impl<R: Rng> Builder<'_, '_, R> {
    fn build(&mut self, rows: &[usize], depth: usize) -> TreeNode {
        let mut counts = [0usize; 2];
        for &i in rows {
            counts[self.y[i] as usize] += 1;
        }
        let leaf = TreeNode::Leaf { counts };
        if counts[0] == 0
            || counts[1] == 0
            || depth >= self.params.max_depth
            || rows.len() < self.params.min_split_size.max(2)
        {
            return leaf;
        }

        let p = self.x[0].len();
        let features: Vec<usize> = match &mut self.sampler {
            Some(s) if s.per_split < p => {
                let mut f = sample(s.rng, p, s.per_split).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        };
        let candidates: Vec<Candidate> = features
            .into_iter()
            .filter_map(|f| best_threshold(self.x, self.y, rows, f, self.params.min_leaf_size.max(1)))
            .filter(|c| c.gain > 0.0)
            .collect();
        if candidates.is_empty() {
            return leaf;
        }
        let chosen = match self.params.criterion {
            Criterion::InformationGain => candidates
                .iter()
                .reduce(|a, b| if b.gain > a.gain { b } else { a })
                .map(|c| (c, c.gain)),
            Criterion::GainRatio => {
                // only features with at least average gain compete on gain ratio
                let avg = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
                candidates
                    .iter()
                    .filter(|c| c.gain >= avg - 1e-12)
                    .reduce(|a, b| if b.ratio > a.ratio { b } else { a })
                    .map(|c| (c, c.ratio))
            }
        };
        let Some((best, score)) = chosen else {
            return leaf;
        };
        if score < self.params.minimal_gain {
            return leaf;
        }
        let (feature, threshold) = (best.feature, best.threshold);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][feature] <= threshold);
        TreeNode::Split {
            feature,
            threshold,
            counts,
            left: Box::new(self.build(&l, depth + 1)),
            right: Box::new(self.build(&r, depth + 1)),
        }
    }
}

/// Upper confidence limit on a leaf's error rate given `errors` of `n` at level `cf`:
/// the `p` with `P(X <= errors) = cf` for `X ~ Binomial(n, p)`.
pub(crate) fn pessimistic_error_rate(errors: usize, n: usize, cf: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if errors >= n {
        return 1.0;
    }
    if errors == 0 {
        return 1.0 - cf.powf(1.0 / n as f64);
    }
    let cdf = |p: f64| Binomial::new(p, n as u64).map(|b| b.cdf(errors as u64)).unwrap_or(0.0);
    let (mut lo, mut hi) = (errors as f64 / n as f64, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) > cf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn leaf_estimate(counts: [usize; 2], cf: f64) -> f64 {
    let n = counts[0] + counts[1];
    let errors = counts[0].min(counts[1]);
    n as f64 * pessimistic_error_rate(errors, n, cf)
}

/// Bottom-up subtree replacement; returns the node's estimated error count.
fn prune(node: &mut TreeNode, cf: f64) -> f64 {
    let (counts, subtree) = match node {
        TreeNode::Leaf { counts } => return leaf_estimate(*counts, cf),
        TreeNode::Split {
            counts, left, right, ..
        } => (*counts, prune(left, cf) + prune(right, cf)),
    };
    let as_leaf = leaf_estimate(counts, cf);
    if as_leaf <= subtree + 1e-12 {
        *node = TreeNode::Leaf { counts };
        as_leaf
    } else {
        subtree
    }
}

pub(crate) fn build_tree<R: Rng>(
    x: &[Vec<f64>],
    y: &[bool],
    rows: &[usize],
    params: &TreeParams,
    sampler: Option<FeatureSampler<'_, R>>,
) -> TreeModel {
    let mut builder = Builder { x, y, params, sampler };
    let mut root = builder.build(rows, 0);
    if params.apply_pruning {
        prune(&mut root, params.confidence);
    }
    TreeModel { root }
}

pub fn train_decision_tree(data: &TrainingData, params: &TreeParams) -> TreeModel {
    let rows: Vec<usize> = (0..data.len()).collect();
    build_tree::<rand_chacha::ChaCha8Rng>(&data.x, &data.y, &rows, params, None)
}
