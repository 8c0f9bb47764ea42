//! Calendar-month period slicing (UTC).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::{Dataset, ReplyId, TweetId, UserId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidRange(format!("month {month} out of 1..=12")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn start(self) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(self.year, self.month, 1, 0, 0, 0)
            .single()
            .expect("first of month is unambiguous in UTC")
    }

    pub fn plus_months(self, n: u32) -> YearMonth {
        let zero_based = self.year as i64 * 12 + (self.month as i64 - 1) + n as i64;
        YearMonth {
            year: zero_based.div_euclid(12) as i32,
            month: zero_based.rem_euclid(12) as u32 + 1,
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (y, m) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| Error::InvalidRange(format!("expected YYYY-MM, got `{s}`")))?;
        let year = y
            .parse()
            .map_err(|_| Error::InvalidRange(format!("bad year in `{s}`")))?;
        let month = m
            .parse()
            .map_err(|_| Error::InvalidRange(format!("bad month in `{s}`")))?;
        YearMonth::new(year, month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `periods` consecutive calendar months starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSpec {
    pub start: YearMonth,
    pub periods: u32,
}

impl PeriodSpec {
    pub fn range(&self) -> (DateTime<Utc>, DateTime<Utc>) {
        (self.start.start(), self.start.plus_months(self.periods).start())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodSlice {
    /// 1-based period number.
    pub index: u32,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub tweet_ids: BTreeSet<TweetId>,
    pub reply_ids: BTreeSet<ReplyId>,
}

impl PeriodSlice {
    pub fn contains(&self, at: DateTime<Utc>) -> bool {
        self.start <= at && at < self.end
    }

    /// Users who authored at least one tweet in this slice.
    pub fn active_users(&self, dataset: &Dataset) -> BTreeSet<UserId> {
        self.tweet_ids
            .iter()
            .filter_map(|id| dataset.tweet(id))
            .map(|t| t.author_id.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub slices: Vec<PeriodSlice>,
    pub out_of_range_tweets: BTreeSet<TweetId>,
    pub out_of_range_replies: BTreeSet<ReplyId>,
}

impl Partition {
    pub fn slice(&self, index: u32) -> Option<&PeriodSlice> {
        self.slices.iter().find(|s| s.index == index)
    }
}

/// The smallest run of whole months holding every tweet, or `None` without tweets.
pub fn covering_period_spec(dataset: &Dataset) -> Option<PeriodSpec> {
    let first = dataset.tweets.iter().map(|t| t.posted_at).min()?;
    let last = dataset.tweets.iter().map(|t| t.posted_at).max()?;
    let start = YearMonth {
        year: first.year(),
        month: first.month(),
    };
    let months = (last.year() - first.year()) * 12 + last.month() as i32 - first.month() as i32;
    Some(PeriodSpec {
        start,
        periods: months as u32 + 1,
    })
}

pub fn partition_periods(dataset: &Dataset, spec: &PeriodSpec) -> Result<Partition> {
    if spec.periods == 0 {
        return Err(Error::InvalidRange("at least one period is required".into()));
    }
    let mut slices: Vec<PeriodSlice> = (0..spec.periods)
        .map(|i| PeriodSlice {
            index: i + 1,
            start: spec.start.plus_months(i).start(),
            end: spec.start.plus_months(i + 1).start(),
            tweet_ids: BTreeSet::new(),
            reply_ids: BTreeSet::new(),
        })
        .collect();
    let (range_start, range_end) = spec.range();
    if range_end <= range_start {
        return Err(Error::InvalidRange(format!("{range_end} is not after {range_start}")));
    }

    let locate = |at: DateTime<Utc>| slices.partition_point(|s| s.end <= at);
    let mut out_of_range_tweets = BTreeSet::new();
    let mut out_of_range_replies = BTreeSet::new();
    let mut tweet_slots = Vec::new();
    for t in &dataset.tweets {
        let i = locate(t.posted_at);
        if t.posted_at < range_start || i >= slices.len() {
            out_of_range_tweets.insert(t.tweet_id.clone());
        } else {
            tweet_slots.push((i, t.tweet_id.clone()));
        }
    }
    let mut reply_slots = Vec::new();
    for r in &dataset.replies {
        let i = locate(r.posted_at);
        if r.posted_at < range_start || i >= slices.len() {
            out_of_range_replies.insert(r.reply_id.clone());
        } else {
            reply_slots.push((i, r.reply_id.clone()));
        }
    }
    for (i, id) in tweet_slots {
        slices[i].tweet_ids.insert(id);
    }
    for (i, id) in reply_slots {
        slices[i].reply_ids.insert(id);
    }

    Ok(Partition {
        slices,
        out_of_range_tweets,
        out_of_range_replies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::*;

    #[test]
    fn covering_spans_first_to_last_month() {
        let ds = Dataset::new(
            vec![user("u1", 1, 1)],
            vec![
                tweet("t1", "u1", ts(2014, 11, 30), "a"),
                tweet("t2", "u1", ts(2015, 2, 1), "b"),
            ],
            vec![],
            ts(2015, 3, 1),
            "",
        );
        assert_eq!(covering_period_spec(&ds), Some(spec(2014, 11, 4)));
        assert_eq!(covering_period_spec(&Dataset::empty(ts(2015, 1, 1))), None);
    }

    fn spec(y: i32, m: u32, k: u32) -> PeriodSpec {
        PeriodSpec {
            start: YearMonth::new(y, m).unwrap(),
            periods: k,
        }
    }

    #[test]
    fn year_month_arithmetic() {
        let ym: YearMonth = "2014-11".parse().unwrap();
        assert_eq!(ym.plus_months(2).to_string(), "2015-01");
        assert_eq!(ym.plus_months(14).to_string(), "2016-01");
        assert!("2014-13".parse::<YearMonth>().is_err());
    }

    #[test]
    fn one_tweet_per_month() {
        let tweets = (0..6)
            .map(|i| tweet(&format!("t{i}"), "a", ts(2014, 7 + i, 15), "x"))
            .collect();
        let ds = Dataset::new(vec![user("a", 1, 1)], tweets, vec![], ts(2015, 1, 1), "");
        let p = partition_periods(&ds, &spec(2014, 7, 6)).unwrap();
        assert_eq!(p.slices.len(), 6);
        for s in &p.slices {
            assert_eq!(s.tweet_ids.len(), 1);
        }
        assert!(p.out_of_range_tweets.is_empty());
    }

    #[test]
    fn boundaries_are_half_open_utc_months() {
        let start = Utc.with_ymd_and_hms(2014, 8, 1, 0, 0, 0).unwrap();
        let just_before = start - chrono::Duration::seconds(1);
        let ds = Dataset::new(
            vec![user("a", 1, 1)],
            vec![
                tweet("t1", "a", just_before, "x"),
                tweet("t2", "a", start, "x"),
                tweet("t3", "a", ts(2014, 6, 30), "x"),
            ],
            vec![],
            ts(2015, 1, 1),
            "",
        );
        let p = partition_periods(&ds, &spec(2014, 7, 2)).unwrap();
        assert!(p.slices[0].tweet_ids.contains(&TweetId::from("t1")));
        assert!(p.slices[1].tweet_ids.contains(&TweetId::from("t2")));
        assert_eq!(p.out_of_range_tweets.len(), 1);
    }

    #[test]
    fn zero_periods_is_an_error() {
        let ds = Dataset::empty(ts(2015, 1, 1));
        assert!(partition_periods(&ds, &spec(2014, 7, 0)).is_err());
    }

    #[test]
    fn union_of_active_users_can_exceed_each_slice() {
        let ds = Dataset::new(
            vec![user("a", 1, 1), user("b", 1, 1), user("c", 1, 1)],
            vec![
                tweet("t1", "a", ts(2014, 7, 3), "x"),
                tweet("t2", "b", ts(2014, 7, 4), "x"),
                tweet("t3", "c", ts(2014, 8, 3), "x"),
                tweet("t4", "a", ts(2014, 8, 4), "x"),
            ],
            vec![],
            ts(2015, 1, 1),
            "",
        );
        let p = partition_periods(&ds, &spec(2014, 7, 2)).unwrap();
        let per_slice: Vec<_> = p.slices.iter().map(|s| s.active_users(&ds)).collect();
        let union: BTreeSet<_> = per_slice.iter().flatten().cloned().collect();
        assert_eq!(per_slice[0].len(), 2);
        assert_eq!(per_slice[1].len(), 2);
        assert_eq!(union.len(), 3);
    }
}
