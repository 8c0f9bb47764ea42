use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{accumulate_domain_features, PeriodSelection, TweetSelection};
use crate::annotate::AnnotatedDataset;
use crate::corpus::{Dataset, GroundTruthLabels, Label, UserId};
use crate::{Error, Result};

pub const FEATURE_COUNT: usize = 12;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "domain_favorite_count",
    "domain_replies_count",
    "domain_retweet_count",
    "followers_count",
    "friends_count",
    "retweet_count",
    "favorite_count",
    "replies_count",
    "count_domain_pos",
    "count_domain_neg",
    "sum_domain_pos",
    "sum_domain_neg",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub user_id: UserId,
    pub domain: String,
    pub period: String,
    pub values: [f64; FEATURE_COUNT],
    pub label: Option<Label>,
}

/// Rows in user-id order; `values` columns follow [`FEATURE_NAMES`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<MatrixRow>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<MatrixRow>) -> Self {
        FeatureMatrix { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.label.is_some())
    }

    pub fn features(&self) -> Vec<[f64; FEATURE_COUNT]> {
        self.rows.iter().map(|r| r.values).collect()
    }

    /// Labels as booleans (`true` = influencer). Fails on any unlabeled row.
    pub fn targets(&self) -> Result<Vec<bool>> {
        self.rows
            .iter()
            .map(|r| {
                r.label
                    .map(Label::is_positive)
                    .ok_or_else(|| Error::InvalidData(format!("row {} has no label", r.user_id)))
            })
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Attaches labels and keeps only the rows that have one.
    pub fn with_labels(&self, labels: &GroundTruthLabels) -> FeatureMatrix {
        FeatureMatrix {
            rows: self
                .rows
                .iter()
                .filter_map(|r| {
                    labels.get(&r.user_id).map(|l| MatrixRow {
                        label: Some(l),
                        ..r.clone()
                    })
                })
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["user_id", "domain", "period"];
        header.extend(FEATURE_NAMES);
        header.push("label");
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.user_id.to_string(), row.domain.clone(), row.period.clone()];
            record.extend(row.values.iter().map(|v| v.to_string()));
            record.push(row.label.map(|l| l.as_str().to_owned()).unwrap_or_default());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a matrix written by [`FeatureMatrix::write_csv`]. Feature columns are found by
    /// name, so extra columns and any column order are accepted; `label` is optional.
    pub fn read_csv<R: Read>(reader: R) -> Result<FeatureMatrix> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = r.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let user_col = col("user_id").ok_or_else(|| Error::InvalidData("missing column user_id".into()))?;
        let feature_cols = FEATURE_NAMES
            .iter()
            .map(|n| col(n).ok_or_else(|| Error::InvalidData(format!("missing column {n}"))))
            .collect::<Result<Vec<_>>>()?;
        let (domain_col, period_col, label_col) = (col("domain"), col("period"), col("label"));

        let mut rows = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let field = |c: Option<usize>| c.and_then(|c| record.get(c)).unwrap_or("").to_owned();
            let mut values = [0.0; FEATURE_COUNT];
            for (k, &c) in feature_cols.iter().enumerate() {
                let raw = record.get(c).unwrap_or("");
                values[k] = raw.parse().map_err(|_| Error::MalformedLine {
                    line,
                    message: format!("{}: not a number: `{raw}`", FEATURE_NAMES[k]),
                })?;
            }
            let label = match field(label_col).as_str() {
                "" => None,
                s => Some(s.parse().map_err(|e: Error| Error::MalformedLine {
                    line,
                    message: e.to_string(),
                })?),
            };
            rows.push(MatrixRow {
                user_id: field(Some(user_col)).into(),
                domain: field(domain_col),
                period: field(period_col),
                values,
                label,
            });
        }
        Ok(FeatureMatrix { rows })
    }

    pub fn load_csv(path: &Path) -> Result<FeatureMatrix> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// Builds the 12-column matrix for one domain and tweet selection.
///
/// One row per user with at least one selected tweet. Users without annotatable tweets in
/// `domain` get zeros in the domain columns. With `labels`, only labeled users are kept.
pub fn assemble_matrix(
    dataset: &Dataset,
    annotations: &AnnotatedDataset,
    domain: &str,
    selection: &TweetSelection,
    labels: Option<&GroundTruthLabels>,
) -> Result<FeatureMatrix> {
    let domain_rows: BTreeMap<UserId, _> = accumulate_domain_features(dataset, annotations, selection)
        .into_iter()
        .filter(|r| r.domain == domain)
        .map(|r| (r.user_id.clone(), r))
        .collect();
    if domain_rows.is_empty() {
        return Err(Error::InvalidData(format!(
            "no user has annotatable tweets in domain `{domain}` for period {}",
            selection.period
        )));
    }

    let mut totals: BTreeMap<&UserId, [f64; 3]> = BTreeMap::new();
    for t in dataset
        .tweets
        .iter()
        .filter(|t| selection.tweet_ids.contains(&t.tweet_id))
    {
        let e = totals.entry(&t.author_id).or_default();
        e[0] += t.retweet_count as f64;
        e[1] += t.favorite_count as f64;
        e[2] += t.replies_count as f64;
    }

    let period = selection.period.to_string();
    let mut rows = Vec::with_capacity(totals.len());
    for (user_id, [retweets, favorites, replies]) in totals {
        let label = match labels {
            Some(labels) => match labels.get(user_id) {
                Some(l) => Some(l),
                None => continue,
            },
            None => None,
        };
        let Some(profile) = dataset.user(user_id) else {
            continue;
        };
        let d = domain_rows.get(user_id);
        let pick = |f: fn(&super::UserDomainFeatures) -> f64| d.map(f).unwrap_or(0.0);
        rows.push(MatrixRow {
            user_id: user_id.clone(),
            domain: domain.to_owned(),
            period: period.clone(),
            values: [
                pick(|r| r.likes),
                pick(|r| r.replies),
                pick(|r| r.retweets),
                profile.followers_count as f64,
                profile.friends_count as f64,
                retweets,
                favorites,
                replies,
                pick(|r| r.positive_count),
                pick(|r| r.negative_count),
                pick(|r| r.positive_sum),
                pick(|r| r.negative_sum),
            ],
            label,
        });
    }
    Ok(FeatureMatrix { rows })
}

/// Matrices for every period plus the pooled selection, keyed by [`PeriodSelection`].
/// Periods without any annotatable tweet in `domain` are omitted.
pub fn assemble_all_periods(
    dataset: &Dataset,
    annotations: &AnnotatedDataset,
    domain: &str,
    partition: &crate::corpus::Partition,
    labels: Option<&GroundTruthLabels>,
) -> Result<BTreeMap<PeriodSelection, FeatureMatrix>> {
    let mut out = BTreeMap::new();
    for slice in &partition.slices {
        match assemble_matrix(dataset, annotations, domain, &TweetSelection::period(slice), labels) {
            Ok(m) => {
                out.insert(PeriodSelection::Period(slice.index), m);
            }
            Err(Error::InvalidData(msg)) => log::warn!("{msg}"),
            Err(e) => return Err(e),
        }
    }
    let pooled = assemble_matrix(dataset, annotations, domain, &TweetSelection::pooled(partition), labels)?;
    out.insert(PeriodSelection::Pooled, pooled);
    Ok(out)
}
