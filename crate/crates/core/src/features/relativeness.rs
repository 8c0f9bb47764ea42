use std::collections::BTreeMap;

use crate::annotate::DomainAnnotation;

/// Share of a tweet's engagement attributed to each of its inferred domains.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DomainWeightMap(BTreeMap<String, f64>);

impl DomainWeightMap {
    pub fn get(&self, domain: &str) -> Option<f64> {
        self.0.get(domain).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(d, w)| (d.as_str(), *w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Domain-base relativeness factor: `weight_d = score_d / sum(scores)`.
///
/// Returns `None` when there is nothing to distribute over (no annotations, or all
/// scores zero); such tweets contribute to no domain.
pub fn relativeness_weights(annotations: &[DomainAnnotation]) -> Option<DomainWeightMap> {
    let total: f64 = annotations.iter().map(|a| a.score).sum();
    if annotations.is_empty() || total <= 0.0 || !total.is_finite() {
        return None;
    }
    let mut weights = BTreeMap::new();
    for a in annotations.iter().filter(|a| a.score > 0.0) {
        *weights.entry(a.label.clone()).or_insert(0.0) += a.score / total;
    }
    Some(DomainWeightMap(weights))
}

/// Spreads `amount` (a count or a signed sentiment sum) over the weighted domains.
pub fn distribute(amount: f64, weights: &DomainWeightMap) -> BTreeMap<String, f64> {
    weights.iter().map(|(d, w)| (d.to_owned(), amount * w)).collect()
}
