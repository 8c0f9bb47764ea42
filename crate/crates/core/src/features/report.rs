use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    accumulate_domain_features, global_features, normalize_domain_features, NormalizedFeatures, PeriodSelection,
    TweetSelection,
};
use crate::annotate::AnnotatedDataset;
use crate::corpus::{Dataset, Partition, UserId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedValue {
    pub user_id: UserId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodTop {
    pub period: PeriodSelection,
    pub retweets: Vec<RankedValue>,
    pub likes: Vec<RankedValue>,
    pub replies: Vec<RankedValue>,
    pub sentiment: Vec<RankedValue>,
}

/// Top-k users per normalized feature, per period, plus the dataset-wide `FF_R'` ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKReport {
    pub domain: String,
    pub k: usize,
    pub periods: Vec<PeriodTop>,
    pub ffr: Vec<RankedValue>,
}

/// Highest values first; ties by user id.
fn top_k<T>(items: &[T], k: usize, key: impl Fn(&T) -> (&UserId, f64)) -> Vec<RankedValue> {
    let mut ranked: Vec<RankedValue> = items
        .iter()
        .map(|i| {
            let (user_id, value) = key(i);
            RankedValue {
                user_id: user_id.clone(),
                value,
            }
        })
        .collect();
    ranked.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.user_id.cmp(&b.user_id)));
    ranked.truncate(k);
    ranked
}

fn period_top(period: PeriodSelection, rows: &[NormalizedFeatures], k: usize) -> PeriodTop {
    PeriodTop {
        period,
        retweets: top_k(rows, k, |r| (&r.user_id, r.retweets)),
        likes: top_k(rows, k, |r| (&r.user_id, r.likes)),
        replies: top_k(rows, k, |r| (&r.user_id, r.replies)),
        sentiment: top_k(rows, k, |r| (&r.user_id, r.sentiment)),
    }
}

/// Builds the report. A period with no annotatable tweet in `domain` yields an empty section.
pub fn top_k_report(
    dataset: &Dataset,
    annotations: &AnnotatedDataset,
    domain: &str,
    partition: &Partition,
    k: usize,
) -> TopKReport {
    let mut periods = Vec::with_capacity(partition.slices.len());
    for slice in &partition.slices {
        let rows: Vec<_> = accumulate_domain_features(dataset, annotations, &TweetSelection::period(slice))
            .into_iter()
            .filter(|r| r.domain == domain)
            .collect();
        periods.push(period_top(
            PeriodSelection::Period(slice.index),
            &normalize_domain_features(&rows),
            k,
        ));
    }
    let global = global_features(dataset);
    TopKReport {
        domain: domain.to_owned(),
        k,
        periods,
        ffr: top_k(&global, k, |g| (&g.user_id, g.ffr_normalized)),
    }
}

impl TopKReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("domain: {}\n", self.domain);
        let section = |out: &mut String, title: &str, values: &[RankedValue]| {
            let _ = writeln!(out, "  {title}");
            if values.is_empty() {
                let _ = writeln!(out, "    (none)");
            }
            for (i, v) in values.iter().enumerate() {
                let _ = writeln!(out, "    {:>2}. {:<24} {:.3}", i + 1, v.user_id, v.value);
            }
        };
        for p in &self.periods {
            let _ = writeln!(out, "period {}", p.period);
            section(&mut out, "R'", &p.retweets);
            section(&mut out, "L'", &p.likes);
            section(&mut out, "P'", &p.replies);
            section(&mut out, "S'", &p.sentiment);
        }
        out.push_str("all periods\n");
        section(&mut out, "FF_R'", &self.ffr);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{annotate_dataset, LexiconAnnotator};
    use crate::corpus::test_support::*;
    use crate::corpus::{partition_periods, PeriodSpec};

    #[test]
    fn k_rows_per_feature_and_empty_periods() {
        let mut tweets = Vec::new();
        for (i, u) in ["a", "b", "c", "d", "e", "f", "g"].iter().enumerate() {
            let mut t = tweet(&format!("t{i}"), u, ts(2014, 7, 2 + i as u32), "football goal");
            t.retweet_count = i as u64 + 1;
            tweets.push(t);
        }
        let users = ["a", "b", "c", "d", "e", "f", "g"]
            .iter()
            .map(|u| user(u, 10, 1))
            .collect();
        let ds = Dataset::new(users, tweets, vec![], ts(2015, 1, 1), "");
        let ann = annotate_dataset(&ds, &LexiconAnnotator::builtin(), None);
        let part = partition_periods(
            &ds,
            &PeriodSpec {
                start: "2014-07".parse().unwrap(),
                periods: 2,
            },
        )
        .unwrap();
        let report = top_k_report(&ds, &ann, "Sports", &part, 5);
        assert_eq!(report.periods.len(), 2);
        let p1 = &report.periods[0];
        for list in [&p1.retweets, &p1.likes, &p1.replies, &p1.sentiment] {
            assert_eq!(list.len(), 5);
        }
        assert_eq!(p1.retweets[0].user_id.as_str(), "g");
        assert_eq!(p1.retweets[0].value, 1.0);
        assert!(report.periods[1].retweets.is_empty());
        assert_eq!(report.ffr.len(), 5);
        let text = report.to_text();
        assert!(text.contains("period 2\n  R'\n    (none)"));
    }
}
