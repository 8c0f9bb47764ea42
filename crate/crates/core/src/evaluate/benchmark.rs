use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::{confusion, metrics, percent, ConfusionTable, MetricsReport};
use super::roc::{roc, RocCurve};
use super::split::{split_indices, SplitSpec};
use crate::corpus::Label;
use crate::features::FeatureMatrix;
use crate::learn::{classify, derive_seed, train, Algorithm, ModelSpec, TrainingData, TrainingSummary};
use crate::{Error, Result};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed {
        confusion: ConfusionTable,
        metrics: MetricsReport,
        /// Absent when the test split holds a single class.
        roc: Option<RocCurve>,
        training: TrainingSummary,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    pub name: String,
    pub spec: Option<ModelSpec>,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl AlgorithmResult {
    pub fn metrics(&self) -> Option<&MetricsReport> {
        match &self.outcome {
            Outcome::Completed { metrics, .. } => Some(metrics),
            Outcome::Skipped { .. } => None,
        }
    }
}

/// Everything here is a function of the data, specs and split; wall times live in
/// [`BenchmarkTimings`] so that reruns produce identical report files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub format_version: u32,
    pub dataset_fingerprint: String,
    pub split: SplitSpec,
    pub train_rows: usize,
    pub test_rows: usize,
    pub test_positives: usize,
    pub results: Vec<AlgorithmResult>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTimings {
    /// Training plus prediction, seconds.
    pub wall_seconds: BTreeMap<Algorithm, f64>,
}

/// Default specs for all seven algorithms, each with its own seed derived from `master_seed`.
pub fn default_specs(master_seed: u64) -> Vec<ModelSpec> {
    Algorithm::ALL
        .iter()
        .enumerate()
        .map(|(i, &a)| ModelSpec::defaults(a, derive_seed(master_seed, i as u64)))
        .collect()
}

/// SHA-256 over the matrix CSV serialization.
pub fn dataset_fingerprint(matrix: &FeatureMatrix) -> Result<String> {
    let mut buf = Vec::new();
    matrix.write_csv(&mut buf)?;
    Ok(Sha256::digest(&buf).iter().map(|b| format!("{b:02x}")).collect())
}

fn run_one(spec: &ModelSpec, train_data: &TrainingData, test: &TrainingData) -> Result<Outcome> {
    let model = train(spec, train_data)?;
    let scores = model.predict_all(&test.x)?;
    let predictions: Vec<Label> = scores.iter().map(|&p| classify(p)).collect();
    let truth: Vec<Label> = test.y.iter().map(|&y| Label::from_positive(y)).collect();
    let ct = confusion(&predictions, &truth)?;
    let roc = match roc(&scores, &test.y) {
        Ok(c) => Some(c),
        Err(e) => {
            log::warn!("{}: no ROC curve: {e}", spec.algorithm());
            None
        }
    };
    Ok(Outcome::Completed {
        confusion: ct,
        metrics: metrics(&ct)?,
        roc,
        training: model.summary,
    })
}

/// Trains and scores every configured algorithm on one shared split.
///
/// Algorithms run in parallel on the current rayon pool. A failing or unconfigured
/// algorithm is recorded as skipped; the report always lists all seven in report order.
pub fn benchmark(
    matrix: &FeatureMatrix,
    specs: &[ModelSpec],
    split: &SplitSpec,
) -> Result<(BenchmarkReport, BenchmarkTimings)> {
    for (i, s) in specs.iter().enumerate() {
        if specs[..i].iter().any(|o| o.algorithm() == s.algorithm()) {
            return Err(Error::Config(format!("algorithm {} configured twice", s.algorithm())));
        }
    }
    let data = TrainingData::from_matrix(matrix)?;
    let s = split_indices(&data.y, split)?;
    let pick = |idx: &[usize]| TrainingData {
        x: idx.iter().map(|&i| data.x[i].clone()).collect(),
        y: idx.iter().map(|&i| data.y[i]).collect(),
    };
    let (train_data, test) = (pick(&s.train), pick(&s.test));

    let runs: Vec<(AlgorithmResult, Option<f64>)> = Algorithm::ALL
        .par_iter()
        .map(|&algorithm| {
            let spec = specs.iter().find(|s| s.algorithm() == algorithm);
            let started = Instant::now();
            let outcome = match spec {
                None => Outcome::Skipped {
                    reason: "not configured".into(),
                },
                Some(spec) => run_one(spec, &train_data, &test).unwrap_or_else(|e| {
                    log::warn!("{algorithm} skipped: {e}");
                    Outcome::Skipped { reason: e.to_string() }
                }),
            };
            let elapsed = spec.map(|_| started.elapsed().as_secs_f64());
            let result = AlgorithmResult {
                algorithm,
                name: algorithm.display_name().to_owned(),
                spec: spec.cloned(),
                outcome,
            };
            (result, elapsed)
        })
        .collect();

    let mut timings = BenchmarkTimings::default();
    let mut results = Vec::with_capacity(runs.len());
    for (r, t) in runs {
        if let Some(t) = t {
            timings.wall_seconds.insert(r.algorithm, t);
        }
        results.push(r);
    }
    let report = BenchmarkReport {
        format_version: REPORT_FORMAT_VERSION,
        dataset_fingerprint: dataset_fingerprint(matrix)?,
        split: split.clone(),
        train_rows: train_data.len(),
        test_rows: test.len(),
        test_positives: test.positives(),
        results,
    };
    Ok((report, timings))
}

impl BenchmarkReport {
    pub fn result(&self, algorithm: Algorithm) -> Option<&AlgorithmResult> {
        self.results.iter().find(|r| r.algorithm == algorithm)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let report: BenchmarkReport = serde_json::from_str(s)?;
        if report.format_version != REPORT_FORMAT_VERSION {
            return Err(Error::InvalidData(format!(
                "report format version {} is not supported",
                report.format_version
            )));
        }
        Ok(report)
    }

    /// Tab-separated metrics table, percentages to three decimals.
    pub fn to_table(&self) -> String {
        let mut out = String::from("Model\tAccuracy\tClassification error\tPrecision\tRecall\tF_measure\n");
        for r in &self.results {
            match &r.outcome {
                Outcome::Completed { metrics: m, .. } => {
                    let cells = [m.accuracy, m.classification_error, m.precision, m.recall, m.f_score]
                        .map(percent)
                        .join("\t");
                    out.push_str(&format!("{}\t{cells}\n", r.name));
                }
                Outcome::Skipped { reason } => {
                    out.push_str(&format!("{}\tskipped: {}\n", r.name, reason.replace(['\t', '\n'], " ")));
                }
            }
        }
        out
    }

    /// One CSV of every ROC point, keyed by algorithm.
    pub fn write_roc_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["algorithm", "threshold", "fpr", "tpr"])?;
        for r in &self.results {
            if let Outcome::Completed { roc: Some(curve), .. } = &r.outcome {
                for p in &curve.points {
                    w.write_record([
                        r.algorithm.as_str().to_owned(),
                        p.threshold.map(|t| t.to_string()).unwrap_or_default(),
                        p.fpr.to_string(),
                        p.tpr.to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}
