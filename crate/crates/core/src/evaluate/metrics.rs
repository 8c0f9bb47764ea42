use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::{Error, Result};

/// Influencer is the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionTable {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionTable {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionTable { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(predictions: &[Label], labels: &[Label]) -> Result<ConfusionTable> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidData(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut ct = ConfusionTable::default();
    for (p, l) in predictions.iter().zip(labels) {
        match (p.is_positive(), l.is_positive()) {
            (true, true) => ct.tp += 1,
            (true, false) => ct.fp += 1,
            (false, true) => ct.fn_ += 1,
            (false, false) => ct.tn += 1,
        }
    }
    Ok(ct)
}

/// Fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classification_error: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// The five table metrics. Undefined ratios (no predicted or no actual positives) are
/// reported as 0 with a warning.
pub fn metrics(ct: &ConfusionTable) -> Result<MetricsReport> {
    let total = ct.total();
    if total == 0 {
        return Err(Error::InvalidData("empty confusion table".into()));
    }
    let accuracy = (ct.tp + ct.tn) as f64 / total as f64;
    // equals (FP + FN) / total, written so that the two always sum to exactly 1
    let classification_error = 1.0 - accuracy;
    let ratio = |num: u64, den: u64, what: &str| {
        if den == 0 {
            log::warn!("{what} undefined (zero denominator); reporting 0");
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(ct.tp, ct.tp + ct.fp, "precision");
    let recall = ratio(ct.tp, ct.tp + ct.fn_, "recall");
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricsReport {
        classification_error,
        accuracy,
        precision,
        recall,
        f_score,
    })
}

/// Percentage with three decimals, as in the published tables.
pub fn percent(v: f64) -> String {
    format!("{:.3}", 100.0 * v)
}
