use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, FEATURE_NAMES};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeight {
    pub feature: String,
    pub weight: f64,
}

/// `|Pearson r|` of each feature with the label, highest first (ties in column order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationWeights {
    pub weights: Vec<FeatureWeight>,
}

impl CorrelationWeights {
    pub fn get(&self, feature: &str) -> Option<f64> {
        self.weights.iter().find(|w| w.feature == feature).map(|w| w.weight)
    }
}

/// Pearson correlation; 0 when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

pub fn correlation_weights_of(columns: &[(&str, Vec<f64>)], labels: &[bool]) -> Result<CorrelationWeights> {
    if labels.len() < 2 {
        return Err(Error::InvalidData("correlation needs at least 2 rows".into()));
    }
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    let mut weights: Vec<FeatureWeight> = columns
        .iter()
        .map(|(name, col)| FeatureWeight {
            feature: (*name).to_owned(),
            weight: pearson(col, &y).abs(),
        })
        .collect();
    weights.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    Ok(CorrelationWeights { weights })
}

pub fn correlation_weights(matrix: &FeatureMatrix) -> Result<CorrelationWeights> {
    let labels = matrix.targets()?;
    let columns: Vec<(&str, Vec<f64>)> = FEATURE_NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| (*name, matrix.rows.iter().map(|r| r.values[j]).collect()))
        .collect();
    correlation_weights_of(&columns, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_independent_and_constant() {
        let labels = [true, false, true, false];
        let cols = vec![
            ("same", vec![1.0, 0.0, 1.0, 0.0]),
            // orthogonal to the centered label
            ("indep", vec![1.0, 1.0, -1.0, -1.0]),
            ("flat", vec![3.0; 4]),
            ("neg", vec![-2.0, 5.0, -2.0, 5.0]),
        ];
        let w = correlation_weights_of(&cols, &labels).unwrap();
        assert_eq!(w.get("same"), Some(1.0));
        assert_eq!(w.get("neg"), Some(1.0));
        assert!(w.get("indep").unwrap().abs() < 1e-15);
        assert_eq!(w.get("flat"), Some(0.0));
        assert_eq!(w.weights[0].feature, "same");
        assert!(w.weights.windows(2).all(|p| p[0].weight >= p[1].weight));
    }
}
