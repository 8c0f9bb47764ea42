//! Splitting, confusion tables, metrics, ROC/AUC, correlation weights and the
//! seven-model benchmark.

mod benchmark;
mod correlation;
mod metrics;
mod roc;
mod split;

pub use benchmark::{
    benchmark, dataset_fingerprint, default_specs, AlgorithmResult, BenchmarkReport, BenchmarkTimings, Outcome,
    REPORT_FORMAT_VERSION,
};
pub use correlation::{correlation_weights, correlation_weights_of, pearson, CorrelationWeights, FeatureWeight};
pub use metrics::{confusion, metrics, percent, ConfusionTable, MetricsReport};
pub use roc::{roc, RocCurve, RocPoint};
pub use split::{split, split_indices, Split, SplitSpec};
