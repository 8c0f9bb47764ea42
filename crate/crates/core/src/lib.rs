//! Domain-based credibility features and influencer classification for tweet archives.
//!
//! The crate is organised as a pipeline:
//!
//! - [`corpus`]: data model, archive ingestion, cleansing, monthly period slicing and a
//!   synthetic generator with planted influencers.
//! - [`annotate`]: taxonomy and sentiment annotation behind the [`annotate::Annotator`]
//!   contract, with a deterministic lexicon provider.
//! - [`features`]: the domain-base relativeness factor, raw and normalized credibility
//!   attributes, and the 12-column feature matrix.
//! - [`learn`]: seven classifiers behind one probability-prediction contract.
//! - [`evaluate`]: splitting, confusion tables, metrics, ROC/AUC, correlation weights and
//!   the benchmark report.
//! - [`fixtures`]: worked reference values that `influence verify` replays.

pub mod annotate;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod fixtures;
pub mod learn;

pub use error::{Error, Result};
