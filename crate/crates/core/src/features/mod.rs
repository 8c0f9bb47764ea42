//! Domain-based credibility features and the 12-column feature matrix.

mod credibility;
mod matrix;
mod relativeness;
mod report;

pub use credibility::{
    accumulate_domain_features, age_years, compute_ffr, followers_friends_relation, global_features,
    normalize_domain_features, normalize_ffr, normalize_max, normalize_min_max, sentiment_score, NormalizedFeatures,
    PeriodSelection, TweetSelection, UserDomainFeatures, UserGlobalFeatures,
};
pub use matrix::{assemble_all_periods, assemble_matrix, FeatureMatrix, MatrixRow, FEATURE_COUNT, FEATURE_NAMES};
pub use relativeness::{distribute, relativeness_weights, DomainWeightMap};
pub use report::{top_k_report, PeriodTop, RankedValue, TopKReport};
