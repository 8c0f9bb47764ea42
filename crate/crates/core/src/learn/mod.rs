//! Binary influencer classifiers behind one train / predict contract.
//!
//! Every model outputs the probability of [`Label::Influencer`]; [`classify`] thresholds it
//! at 0.5 with ties going to the positive class.

mod forest;
mod gbt;
mod linear;
mod naive_bayes;
mod nn;
mod standardize;
mod tree;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::features::FeatureMatrix;
use crate::{Error, Result};

pub use forest::{train_random_forest, ForestModel, ForestParams};
pub use gbt::{fit_regression_tree, train_gbt, GbtModel, GbtParams, RegressionNode, RegressionTree};
pub use linear::{train_glm_elastic_net, train_logistic, Family, GlmParams, LinearModel, LogisticParams, Solver};
pub use naive_bayes::{train_naive_bayes, NaiveBayesModel, NaiveBayesParams};
pub use nn::{initial_network, train_neural_net, Activation, LossFunction, NeuralNet, NeuralNetParams};
pub use standardize::Standardizer;
pub use tree::{train_decision_tree, Criterion, TreeModel, TreeNode, TreeParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

pub const DECISION_THRESHOLD: f64 = 0.5;

pub fn classify(probability: f64) -> Label {
    Label::from_positive(probability >= DECISION_THRESHOLD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    NaiveBayes,
    Logistic,
    GlmElasticNet,
    DecisionTree,
    RandomForest,
    GradientBoostedTrees,
    NeuralNet,
}

impl Algorithm {
    /// Report order.
    pub const ALL: [Algorithm; 7] = [
        Algorithm::GlmElasticNet,
        Algorithm::NaiveBayes,
        Algorithm::Logistic,
        Algorithm::NeuralNet,
        Algorithm::DecisionTree,
        Algorithm::RandomForest,
        Algorithm::GradientBoostedTrees,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::NaiveBayes => "naive_bayes",
            Algorithm::Logistic => "logistic",
            Algorithm::GlmElasticNet => "glm_elastic_net",
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::RandomForest => "random_forest",
            Algorithm::GradientBoostedTrees => "gradient_boosted_trees",
            Algorithm::NeuralNet => "neural_net",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::NaiveBayes => "Naive Bayes",
            Algorithm::Logistic => "Logistic Regression",
            Algorithm::GlmElasticNet => "Generalised Linear Model",
            Algorithm::DecisionTree => "Decision Tree",
            Algorithm::RandomForest => "Random Forest",
            Algorithm::GradientBoostedTrees => "Gradient Boosted Trees",
            Algorithm::NeuralNet => "Deep Learning",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmParams {
    NaiveBayes(NaiveBayesParams),
    Logistic(LogisticParams),
    GlmElasticNet(GlmParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    GradientBoostedTrees(GbtParams),
    NeuralNet(NeuralNetParams),
}

impl AlgorithmParams {
    pub fn defaults(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::NaiveBayes => AlgorithmParams::NaiveBayes(Default::default()),
            Algorithm::Logistic => AlgorithmParams::Logistic(Default::default()),
            Algorithm::GlmElasticNet => AlgorithmParams::GlmElasticNet(Default::default()),
            Algorithm::DecisionTree => AlgorithmParams::DecisionTree(Default::default()),
            Algorithm::RandomForest => AlgorithmParams::RandomForest(Default::default()),
            Algorithm::GradientBoostedTrees => AlgorithmParams::GradientBoostedTrees(Default::default()),
            Algorithm::NeuralNet => AlgorithmParams::NeuralNet(Default::default()),
        }
    }

    /// Defaults with the literal table readings: gaussian GLM family and 50 hidden layers.
    pub fn literal_table(algorithm: Algorithm) -> Self {
        match Self::defaults(algorithm) {
            AlgorithmParams::GlmElasticNet(p) => AlgorithmParams::GlmElasticNet(GlmParams {
                family: Family::Gaussian,
                ..p
            }),
            AlgorithmParams::NeuralNet(p) => AlgorithmParams::NeuralNet(NeuralNetParams { hidden_layers: 50, ..p }),
            other => other,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            AlgorithmParams::NaiveBayes(_) => Algorithm::NaiveBayes,
            AlgorithmParams::Logistic(_) => Algorithm::Logistic,
            AlgorithmParams::GlmElasticNet(_) => Algorithm::GlmElasticNet,
            AlgorithmParams::DecisionTree(_) => Algorithm::DecisionTree,
            AlgorithmParams::RandomForest(_) => Algorithm::RandomForest,
            AlgorithmParams::GradientBoostedTrees(_) => Algorithm::GradientBoostedTrees,
            AlgorithmParams::NeuralNet(_) => Algorithm::NeuralNet,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{}: {what}", self.algorithm())))
            }
        };
        match self {
            AlgorithmParams::NaiveBayes(_) => Ok(()),
            AlgorithmParams::Logistic(p) => {
                check(p.max_iterations >= 1, "max_iterations must be >= 1")?;
                check(p.tolerance > 0.0, "tolerance must be > 0")?;
                check(p.coefficient_cap > 0.0, "coefficient_cap must be > 0")
            }
            AlgorithmParams::GlmElasticNet(p) => {
                check(p.lambda >= 0.0 && p.lambda.is_finite(), "lambda must be >= 0")?;
                check((0.0..=1.0).contains(&p.alpha), "alpha must be in [0, 1]")?;
                check(p.max_iterations >= 1, "max_iterations must be >= 1")?;
                check(p.tolerance > 0.0, "tolerance must be > 0")?;
                check(p.coefficient_cap > 0.0, "coefficient_cap must be > 0")
            }
            AlgorithmParams::DecisionTree(p) => validate_tree(p, &check),
            AlgorithmParams::RandomForest(p) => {
                check(p.number_of_trees >= 1, "number_of_trees must be >= 1")?;
                check(
                    p.features_per_split.is_none_or(|k| k >= 1),
                    "features_per_split must be >= 1",
                )?;
                validate_tree(&p.tree_params(), &check)
            }
            AlgorithmParams::GradientBoostedTrees(p) => {
                check(p.number_of_trees >= 1, "number_of_trees must be >= 1")?;
                check(p.max_depth >= 1, "max_depth must be >= 1")?;
                check(
                    p.learning_rate > 0.0 && p.learning_rate <= 1.0,
                    "learning_rate must be in (0, 1]",
                )?;
                check(p.min_leaf_size >= 1, "min_leaf_size must be >= 1")
            }
            AlgorithmParams::NeuralNet(p) => {
                check(p.neurons_per_layer >= 1, "neurons_per_layer must be >= 1")?;
                check(p.mean_learning_rate > 0.0, "mean_learning_rate must be > 0")?;
                check(p.l1 >= 0.0 && p.l2 >= 0.0, "l1 and l2 must be >= 0")?;
                check(p.rho > 0.0 && p.rho < 1.0, "rho must be in (0, 1)")?;
                check(p.epsilon > 0.0, "epsilon must be > 0")
            }
        }
    }
}

fn validate_tree(p: &TreeParams, check: &dyn Fn(bool, &str) -> Result<()>) -> Result<()> {
    check(p.max_depth >= 1, "max_depth must be >= 1")?;
    check(p.confidence > 0.0 && p.confidence < 1.0, "confidence must be in (0, 1)")?;
    check(p.minimal_gain >= 0.0, "minimal_gain must be >= 0")?;
    check(p.min_leaf_size >= 1, "min_leaf_size must be >= 1")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub params: AlgorithmParams,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(params: AlgorithmParams, seed: u64) -> Self {
        ModelSpec { params, seed }
    }

    pub fn defaults(algorithm: Algorithm, seed: u64) -> Self {
        ModelSpec::new(AlgorithmParams::defaults(algorithm), seed)
    }

    pub fn algorithm(&self) -> Algorithm {
        self.params.algorithm()
    }
}

/// Row-major features with boolean targets (`true` = influencer).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingData {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
}

impl TrainingData {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<bool>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidData(format!(
                "{} feature rows but {} labels",
                x.len(),
                y.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::InvalidData("no training rows".into()));
        }
        let p = x[0].len();
        for (i, row) in x.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    actual: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!("row {i} has a non-finite feature")));
            }
        }
        Ok(TrainingData { x, y })
    }

    pub fn from_matrix(matrix: &FeatureMatrix) -> Result<Self> {
        let y = matrix.targets()?;
        TrainingData::new(matrix.rows.iter().map(|r| r.values.to_vec()).collect(), y)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|&&y| y).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub iterations: usize,
    pub converged: bool,
    pub final_loss: Option<f64>,
    /// Per-iteration, per-stage or per-epoch training loss, depending on the algorithm.
    #[serde(default)]
    pub loss_history: Vec<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParameters {
    Constant { probability: f64 },
    NaiveBayes(NaiveBayesModel),
    Linear(LinearModel),
    Tree(TreeModel),
    Forest(ForestModel),
    Gbt(GbtModel),
    NeuralNet(NeuralNet),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub n_features: usize,
    pub parameters: ModelParameters,
    pub summary: TrainingSummary,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let p = match &self.parameters {
            ModelParameters::Constant { probability } => *probability,
            ModelParameters::NaiveBayes(m) => m.predict_proba(x),
            ModelParameters::Linear(m) => m.predict_proba(x),
            ModelParameters::Tree(m) => m.predict_proba(x),
            ModelParameters::Forest(m) => m.predict_proba(x),
            ModelParameters::Gbt(m) => m.predict_proba(x),
            ModelParameters::NeuralNet(m) => m.predict_proba(x),
        };
        Ok(p.clamp(0.0, 1.0))
    }

    pub fn classify(&self, x: &[f64]) -> Result<Label> {
        self.predict_proba(x).map(classify)
    }

    pub fn predict_all(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        x.iter().map(|r| self.predict_proba(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidData(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Trains the model described by `spec`.
///
/// Data with a single class yields a constant model predicting that class with
/// probability 1 (or 0), with a warning in the summary.
pub fn train(spec: &ModelSpec, data: &TrainingData) -> Result<TrainedModel> {
    spec.params.validate()?;
    let positives = data.positives();
    let (parameters, summary) = if positives == 0 || positives == data.len() {
        let probability = if positives == 0 { 0.0 } else { 1.0 };
        let warning = format!(
            "{}: training data has a single class; fitted a constant model",
            spec.algorithm()
        );
        log::warn!("{warning}");
        (
            ModelParameters::Constant { probability },
            TrainingSummary {
                converged: true,
                warnings: vec![warning],
                ..Default::default()
            },
        )
    } else {
        match &spec.params {
            AlgorithmParams::NaiveBayes(p) => {
                let m = train_naive_bayes(data, p)?;
                (
                    ModelParameters::NaiveBayes(m),
                    TrainingSummary {
                        converged: true,
                        ..Default::default()
                    },
                )
            }
            AlgorithmParams::Logistic(p) => {
                let (m, s) = train_logistic(data, p)?;
                (ModelParameters::Linear(m), s)
            }
            AlgorithmParams::GlmElasticNet(p) => {
                let (m, s) = train_glm_elastic_net(data, p)?;
                (ModelParameters::Linear(m), s)
            }
            AlgorithmParams::DecisionTree(p) => {
                let m = train_decision_tree(data, p);
                (
                    ModelParameters::Tree(m),
                    TrainingSummary {
                        converged: true,
                        ..Default::default()
                    },
                )
            }
            AlgorithmParams::RandomForest(p) => {
                let m = train_random_forest(data, p, spec.seed);
                (
                    ModelParameters::Forest(m),
                    TrainingSummary {
                        iterations: p.number_of_trees,
                        converged: true,
                        ..Default::default()
                    },
                )
            }
            AlgorithmParams::GradientBoostedTrees(p) => {
                let (m, s) = train_gbt(data, p);
                (ModelParameters::Gbt(m), s)
            }
            AlgorithmParams::NeuralNet(p) => {
                let (m, s) = train_neural_net(data, p, spec.seed)?;
                (ModelParameters::NeuralNet(m), s)
            }
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        n_features: data.n_features(),
        parameters,
        summary,
    })
}

pub fn train_matrix(spec: &ModelSpec, matrix: &FeatureMatrix) -> Result<TrainedModel> {
    train(spec, &TrainingData::from_matrix(matrix)?)
}

/// Independent per-index seed derived from a master seed (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Summed logistic loss of margins `eta` against `y`.
fn logistic_loss(eta: &[f64], y: &[bool]) -> f64 {
    eta.iter()
        .zip(y)
        .map(|(&e, &y)| softplus(e) - if y { e } else { 0.0 })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn separable(n: usize) -> TrainingData {
        // two features; positive iff x0 + x1 > 0, with a margin
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let a = ((i * 37) % 17) as f64 / 17.0 - 0.5;
            let b = ((i * 11) % 13) as f64 / 13.0 - 0.5;
            let pos = i % 2 == 0;
            let shift = if pos { 1.0 } else { -1.0 };
            x.push(vec![a + shift, b + shift]);
            y.push(pos);
        }
        TrainingData::new(x, y).unwrap()
    }

    #[test]
    fn every_algorithm_fits_separable_data() {
        let data = separable(20);
        for alg in Algorithm::ALL {
            let model = train(&ModelSpec::defaults(alg, 3), &data).unwrap();
            if alg == Algorithm::NeuralNet || alg == Algorithm::NaiveBayes {
                continue;
            }
            let correct = data
                .x
                .iter()
                .zip(&data.y)
                .filter(|(x, y)| model.classify(x).unwrap().is_positive() == **y)
                .count();
            assert_eq!(correct, 20, "{alg}");
        }
    }

    #[test]
    fn single_class_gives_constant_model() {
        let data = TrainingData::new(vec![vec![1.0], vec![2.0]], vec![true, true]).unwrap();
        for alg in Algorithm::ALL {
            let m = train(&ModelSpec::defaults(alg, 0), &data).unwrap();
            assert_eq!(m.predict_proba(&[-50.0]).unwrap(), 1.0);
            assert_eq!(m.summary.warnings.len(), 1);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = train(&ModelSpec::defaults(Algorithm::Logistic, 0), &separable(10)).unwrap();
        assert!(matches!(m.predict_proba(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn tie_goes_to_influencer() {
        assert_eq!(classify(0.5), Label::Influencer);
        assert_eq!(classify(0.4999), Label::NonInfluencer);
    }

    #[test]
    fn deterministic_and_serializable() {
        let data = separable(30);
        for alg in Algorithm::ALL {
            let spec = ModelSpec::defaults(alg, 11);
            let a = train(&spec, &data).unwrap();
            let b = train(&spec, &data).unwrap();
            assert_eq!(a, b, "{alg}");
            let back = TrainedModel::from_json(&a.to_json().unwrap()).unwrap();
            for x in &data.x {
                assert_eq!(a.predict_proba(x).unwrap(), back.predict_proba(x).unwrap(), "{alg}");
            }
        }
    }

    #[test]
    fn rejects_unknown_format_version() {
        let m = train(&ModelSpec::defaults(Algorithm::NaiveBayes, 0), &separable(10)).unwrap();
        let json = m
            .to_json()
            .unwrap()
            .replacen("\"format_version\": 1", "\"format_version\": 99", 1);
        assert!(TrainedModel::from_json(&json).is_err());
    }

    #[test]
    fn spec_round_trips_through_json_and_validates() {
        let spec = ModelSpec::defaults(Algorithm::GlmElasticNet, 4);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"algorithm\":\"glm_elastic_net\""));
        assert_eq!(serde_json::from_str::<ModelSpec>(&json).unwrap(), spec);
        let partial: ModelSpec = serde_json::from_str(r#"{"algorithm":"decision_tree","max_depth":3}"#).unwrap();
        match partial.params {
            AlgorithmParams::DecisionTree(p) => assert_eq!((p.max_depth, p.minimal_gain), (3, 0.05)),
            _ => unreachable!(),
        }
        let bad = AlgorithmParams::GlmElasticNet(GlmParams {
            alpha: 1.5,
            ..Default::default()
        });
        assert!(bad.validate().is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..100).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 100);
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
    }

    #[test]
    fn numerics_helpers() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
    }

    fn arbitrary_row() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1e6f64..1e6, 2)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn probabilities_stay_in_unit_interval(x in arbitrary_row()) {
            use std::sync::OnceLock;
            static MODELS: OnceLock<Vec<TrainedModel>> = OnceLock::new();
            let models = MODELS.get_or_init(|| {
                let data = separable(24);
                Algorithm::ALL.iter().map(|&a| train(&ModelSpec::defaults(a, 1), &data).unwrap()).collect()
            });
            for m in models {
                let p = m.predict_proba(&x).unwrap();
                prop_assert!((0.0..=1.0).contains(&p), "{} gave {p}", m.spec.algorithm());
            }
        }
    }
}
