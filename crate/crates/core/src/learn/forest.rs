use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{build_tree, FeatureSampler};
use super::{derive_seed, Criterion, TrainingData, TreeModel, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub number_of_trees: usize,
    pub criterion: Criterion,
    pub max_depth: usize,
    pub minimal_gain: f64,
    pub min_leaf_size: usize,
    pub min_split_size: usize,
    pub apply_pruning: bool,
    pub confidence: f64,
    /// Resample the training rows with replacement for every tree.
    pub bootstrap: bool,
    /// Features drawn at random for each split; `None` considers all of them.
    pub features_per_split: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            number_of_trees: 100,
            criterion: Criterion::GainRatio,
            max_depth: 10,
            minimal_gain: 0.01,
            min_leaf_size: 1,
            min_split_size: 2,
            apply_pruning: false,
            confidence: 0.1,
            bootstrap: true,
            features_per_split: Some(4),
        }
    }
}

impl ForestParams {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            criterion: self.criterion,
            max_depth: self.max_depth,
            confidence: self.confidence,
            minimal_gain: self.minimal_gain,
            min_leaf_size: self.min_leaf_size,
            min_split_size: self.min_split_size,
            apply_pruning: self.apply_pruning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    /// Uniform `1 / N` member weights.
    pub weights: Vec<f64>,
}

impl ForestModel {
    /// Weighted fraction of member trees voting influencer.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.trees
            .iter()
            .zip(&self.weights)
            .filter(|(t, _)| t.vote(x))
            .map(|(_, w)| w)
            .sum::<f64>()
            .min(1.0)
    }
}

/// Members are trained in parallel, each from its own seed derived from `seed` and its
/// index, so the result does not depend on the thread count.
pub fn train_random_forest(data: &TrainingData, params: &ForestParams, seed: u64) -> ForestModel {
    let tree_params = params.tree_params();
    let n = data.len();
    let trees: Vec<TreeModel> = (0..params.number_of_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let sampler = params.features_per_split.map(|k| FeatureSampler {
                rng: &mut rng,
                per_split: k,
            });
            build_tree(&data.x, &data.y, &rows, &tree_params, sampler)
        })
        .collect();
    let w = 1.0 / trees.len() as f64;
    ForestModel {
        weights: vec![w; trees.len()],
        trees,
    }
}
