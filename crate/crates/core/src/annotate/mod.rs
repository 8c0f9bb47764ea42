//! Taxonomy and sentiment annotation.
//!
//! Annotation goes through the [`Annotator`] contract: a provider maps a text to at most
//! three `(label, score, confident)` taxonomy triples and a sentiment score in `[-1, 1]`.
//! [`LexiconAnnotator`] is a deterministic, offline provider; [`HttpAnnotator`] adapts an
//! external JSON service.

mod dataset;
mod external;
mod lexicon;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{
    annotate_dataset, AnnotatedDataset, AnnotatedReply, AnnotatedTweet, AnnotationFailure, AnnotationReport,
};
pub use external::{ExternalProviderConfig, HttpAnnotator};
pub use lexicon::{tokenize, LexiconAnnotator, LexiconConfig, SentimentLexicon, TaxonomyLexicon};

/// Maximum number of taxonomy annotations per analyzed text.
pub const MAX_DOMAINS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainAnnotation {
    pub label: String,
    pub score: f64,
    pub confident: bool,
}

impl DomainAnnotation {
    pub fn new(label: impl Into<String>, score: f64, confident: bool) -> Self {
        DomainAnnotation {
            label: label.into(),
            score,
            confident,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentimentScore(f64);

impl SentimentScore {
    pub const NEUTRAL: SentimentScore = SentimentScore(0.0);

    pub fn new(value: f64) -> Option<Self> {
        (-1.0..=1.0).contains(&value).then_some(SentimentScore(value))
    }

    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            SentimentScore(0.0)
        } else {
            SentimentScore(value.clamp(-1.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotatorError {
    /// Transient provider failure; the same request may succeed later.
    #[error("annotation provider unavailable: {0}")]
    Unavailable(String),
    /// The provider refused the request or answered with something unusable.
    #[error("annotation provider rejected the request: {0}")]
    Rejected(String),
}

impl AnnotatorError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, AnnotatorError::Unavailable(_))
    }
}

/// Provider contract. An empty taxonomy list means "no domain can be inferred".
pub trait Annotator: Send + Sync {
    fn infer_taxonomy(&self, text: &str) -> Result<Vec<DomainAnnotation>, AnnotatorError>;
    fn score_sentiment(&self, text: &str) -> Result<SentimentScore, AnnotatorError>;
}

/// Turns a URL into the text content that should be annotated for it.
pub trait UrlTextResolver: Send + Sync {
    fn resolve(&self, url: &str) -> Option<String>;
}

impl UrlTextResolver for BTreeMap<String, String> {
    fn resolve(&self, url: &str) -> Option<String> {
        self.get(url).cloned()
    }
}

impl UrlTextResolver for HashMap<String, String> {
    fn resolve(&self, url: &str) -> Option<String> {
        self.get(url).cloned()
    }
}

/// Orders annotations by descending score, then ascending label.
pub(crate) fn rank(a: &DomainAnnotation, b: &DomainAnnotation) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.label.cmp(&b.label))
}

/// Combines the tweet-text and URL-content annotations.
///
/// Labels present on both sides get the mean of the two scores (their confident flags
/// are OR-ed); labels on one side keep their score. The union is ranked by score, ties
/// broken by label, and truncated to [`MAX_DOMAINS`].
pub fn merge_domains(text: &[DomainAnnotation], url: &[DomainAnnotation]) -> Vec<DomainAnnotation> {
    let mut by_label: BTreeMap<&str, DomainAnnotation> = BTreeMap::new();
    for a in text.iter().chain(url) {
        by_label
            .entry(a.label.as_str())
            .and_modify(|existing| {
                existing.score = ((existing.score + a.score) / 2.0).min(1.0);
                existing.confident |= a.confident;
            })
            .or_insert_with(|| a.clone());
    }
    let mut merged: Vec<_> = by_label.into_values().collect();
    merged.sort_by(rank);
    merged.truncate(MAX_DOMAINS);
    merged
}

pub(crate) fn validate_annotations(annotations: &[DomainAnnotation]) -> Result<(), AnnotatorError> {
    if annotations.len() > MAX_DOMAINS {
        return Err(AnnotatorError::Rejected(format!(
            "{} taxonomy annotations returned, at most {MAX_DOMAINS} allowed",
            annotations.len()
        )));
    }
    if let Some(bad) = annotations.iter().find(|a| !(0.0..=1.0).contains(&a.score)) {
        return Err(AnnotatorError::Rejected(format!(
            "score {} for `{}` is outside [0, 1]",
            bad.score, bad.label
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ann(label: &str, score: f64) -> DomainAnnotation {
        DomainAnnotation::new(label, score, false)
    }

    #[test]
    fn merge_with_empty_url_side_is_identity() {
        let text = vec![ann("Sports", 1.0), ann("Arts", 0.5)];
        assert_eq!(merge_domains(&text, &[]), text);
        assert_eq!(merge_domains(&[], &text), text);
    }

    #[test]
    fn merge_averages_shared_labels() {
        let merged = merge_domains(&[ann("Sports", 0.8)], &[ann("Sports", 0.6)]);
        assert_eq!(merged.len(), 1);
        assert!((merged[0].score - 0.7).abs() < 1e-15);
    }

    #[test]
    fn merge_keeps_top_three() {
        let merged = merge_domains(&[ann("A", 0.9), ann("B", 0.2)], &[ann("C", 0.5), ann("D", 0.4)]);
        let labels: Vec<_> = merged.iter().map(|a| a.label.as_str()).collect();
        assert_eq!(labels, ["A", "C", "D"]);
    }

    #[test]
    fn merge_breaks_ties_by_label() {
        let merged = merge_domains(&[ann("b", 0.5)], &[ann("a", 0.5)]);
        assert_eq!(merged[0].label, "a");
    }

    #[test]
    fn sentiment_score_bounds() {
        assert!(SentimentScore::new(1.5).is_none());
        assert_eq!(SentimentScore::clamped(-3.0).value(), -1.0);
        assert_eq!(SentimentScore::clamped(f64::NAN).value(), 0.0);
    }

    fn annotations() -> impl Strategy<Value = Vec<DomainAnnotation>> {
        proptest::collection::btree_map("[a-e]", 0.0f64..=1.0, 0..=3).prop_map(|m| {
            let mut v: Vec<_> = m.into_iter().map(|(l, s)| ann(&l, s)).collect();
            v.sort_by(rank);
            v
        })
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_bounded(a in annotations(), b in annotations()) {
            let ab = merge_domains(&a, &b);
            let ba = merge_domains(&b, &a);
            prop_assert_eq!(&ab, &ba);
            prop_assert!(ab.len() <= MAX_DOMAINS);
            for x in &ab {
                prop_assert!((0.0..=1.0).contains(&x.score));
            }
        }
    }
}
