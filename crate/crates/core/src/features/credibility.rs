//! Raw and normalized credibility attributes.
//!
//! Per user `u`, domain `d` and period selection:
//!
//! - `R`, `L`, `P`: retweet, like and reply counts of `u`'s tweets, spread over domains by
//!   the relativeness factor. Normalized by the per-domain maximum.
//! - `SP`, `SN`: sums of positive and negative reply sentiment, spread the same way.
//!   `S = SP - |SN|` is min-max normalized per domain.
//! - `FF_R = (followers - friends) / age_years`, or `1 / age_years` when the two counts
//!   are equal. Min-max normalized over every user of the network.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::relativeness_weights;
use crate::annotate::AnnotatedDataset;
use crate::corpus::{Dataset, TweetId, UserId, UserProfile};
use crate::{Error, Result};

const DAYS_PER_YEAR: f64 = 365.25;

/// Which tweets a feature row was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PeriodSelection {
    Period(u32),
    Pooled,
}

impl fmt::Display for PeriodSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodSelection::Period(i) => write!(f, "{i}"),
            PeriodSelection::Pooled => f.write_str("pooled"),
        }
    }
}

impl std::str::FromStr for PeriodSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pooled" | "all" => Ok(PeriodSelection::Pooled),
            other => other
                .parse()
                .map(PeriodSelection::Period)
                .map_err(|_| Error::InvalidData(format!("bad period `{other}`"))),
        }
    }
}

impl Serialize for PeriodSelection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PeriodSelection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// The set of tweets feeding one feature computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetSelection {
    pub period: PeriodSelection,
    pub tweet_ids: BTreeSet<TweetId>,
}

impl TweetSelection {
    pub fn all(dataset: &Dataset) -> Self {
        TweetSelection {
            period: PeriodSelection::Pooled,
            tweet_ids: dataset.tweets.iter().map(|t| t.tweet_id.clone()).collect(),
        }
    }

    pub fn period(slice: &crate::corpus::PeriodSlice) -> Self {
        TweetSelection {
            period: PeriodSelection::Period(slice.index),
            tweet_ids: slice.tweet_ids.clone(),
        }
    }

    pub fn pooled(partition: &crate::corpus::Partition) -> Self {
        TweetSelection {
            period: PeriodSelection::Pooled,
            tweet_ids: partition
                .slices
                .iter()
                .flat_map(|s| s.tweet_ids.iter().cloned())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDomainFeatures {
    pub user_id: UserId,
    pub domain: String,
    pub period: PeriodSelection,
    /// `R`
    pub retweets: f64,
    /// `L`
    pub likes: f64,
    /// `P`
    pub replies: f64,
    /// `SP`, always >= 0
    pub positive_sum: f64,
    /// `SN`, always <= 0
    pub negative_sum: f64,
    /// `S = SP - |SN|`
    pub sentiment: f64,
    pub positive_count: f64,
    pub negative_count: f64,
    pub domain_tweet_count: u64,
}

impl UserDomainFeatures {
    fn empty(user_id: UserId, domain: String, period: PeriodSelection) -> Self {
        UserDomainFeatures {
            user_id,
            domain,
            period,
            retweets: 0.0,
            likes: 0.0,
            replies: 0.0,
            positive_sum: 0.0,
            negative_sum: 0.0,
            sentiment: 0.0,
            positive_count: 0.0,
            negative_count: 0.0,
            domain_tweet_count: 0,
        }
    }
}

/// Accumulates `R, L, P, SP, SN, S` and reply-polarity counts for every (user, domain)
/// reached by an annotatable tweet in the selection.
///
/// Replies contribute through their parent tweet, using the parent's domain weights.
/// Rows are ordered by domain, then user id; sums run in tweet-id order.
pub fn accumulate_domain_features(
    dataset: &Dataset,
    annotations: &AnnotatedDataset,
    selection: &TweetSelection,
) -> Vec<UserDomainFeatures> {
    let replies_by_parent = dataset.replies_by_parent();
    let mut acc: BTreeMap<(String, UserId), UserDomainFeatures> = BTreeMap::new();

    for tweet in dataset
        .tweets
        .iter()
        .filter(|t| selection.tweet_ids.contains(&t.tweet_id))
    {
        let Some(annotated) = annotations.tweet(&tweet.tweet_id) else {
            continue;
        };
        if !annotated.annotatable {
            continue;
        }
        let Some(weights) = relativeness_weights(&annotated.merged_domains) else {
            continue;
        };

        let (mut pos_sum, mut pos_n, mut neg_sum, mut neg_n) = (0.0, 0.0, 0.0, 0.0);
        for reply in replies_by_parent.get(&tweet.tweet_id).into_iter().flatten() {
            let Some(s) = annotations.reply_sentiment(&reply.reply_id) else {
                continue;
            };
            let v = s.value();
            if v > 0.0 {
                pos_sum += v;
                pos_n += 1.0;
            } else if v < 0.0 {
                neg_sum += v;
                neg_n += 1.0;
            }
        }

        for (domain, w) in weights.iter() {
            let row = acc
                .entry((domain.to_owned(), tweet.author_id.clone()))
                .or_insert_with(|| {
                    UserDomainFeatures::empty(tweet.author_id.clone(), domain.to_owned(), selection.period)
                });
            row.retweets += tweet.retweet_count as f64 * w;
            row.likes += tweet.favorite_count as f64 * w;
            row.replies += tweet.replies_count as f64 * w;
            row.positive_sum += pos_sum * w;
            row.negative_sum += neg_sum * w;
            row.positive_count += pos_n * w;
            row.negative_count += neg_n * w;
            row.domain_tweet_count += 1;
        }
    }

    acc.into_values()
        .map(|mut row| {
            row.sentiment = sentiment_score(row.positive_sum, row.negative_sum);
            row
        })
        .collect()
}

/// `S = SP - |SN|`.
pub fn sentiment_score(positive_sum: f64, negative_sum: f64) -> f64 {
    positive_sum - negative_sum.abs()
}

/// `v / max(values)`; all zeros when the maximum is not positive.
pub fn normalize_max(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| v / max).collect()
}

/// `(v - min) / (max - min)`; a constant column maps to all ones.
pub fn normalize_min_max(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return Vec::new();
    }
    if max == min {
        return vec![1.0; values.len()];
    }
    values.iter().map(|v| (v - min) / (max - min)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedFeatures {
    pub user_id: UserId,
    pub domain: String,
    pub period: PeriodSelection,
    /// `R'`
    pub retweets: f64,
    /// `L'`
    pub likes: f64,
    /// `P'`
    pub replies: f64,
    /// `S'`
    pub sentiment: f64,
}

/// Normalizes every domain's rows independently. Output order follows the input.
pub fn normalize_domain_features(rows: &[UserDomainFeatures]) -> Vec<NormalizedFeatures> {
    let mut by_domain: BTreeMap<(&str, PeriodSelection), Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        by_domain.entry((&r.domain, r.period)).or_default().push(i);
    }
    let mut out: Vec<Option<NormalizedFeatures>> = vec![None; rows.len()];
    for idx in by_domain.values() {
        let column = |f: fn(&UserDomainFeatures) -> f64| idx.iter().map(|&i| f(&rows[i])).collect::<Vec<_>>();
        let r = normalize_max(&column(|r| r.retweets));
        let l = normalize_max(&column(|r| r.likes));
        let p = normalize_max(&column(|r| r.replies));
        let s = normalize_min_max(&column(|r| r.sentiment));
        for (k, &i) in idx.iter().enumerate() {
            out[i] = Some(NormalizedFeatures {
                user_id: rows[i].user_id.clone(),
                domain: rows[i].domain.clone(),
                period: rows[i].period,
                retweets: r[k],
                likes: l[k],
                replies: p[k],
                sentiment: s[k],
            });
        }
    }
    out.into_iter()
        .map(|o| o.expect("every row belongs to a group"))
        .collect()
}

/// Profile age in fractional years, floored at one day.
pub fn age_years(created_at: DateTime<Utc>, capture_at: DateTime<Utc>) -> Option<f64> {
    if created_at >= capture_at {
        return None;
    }
    let days = (capture_at - created_at).num_milliseconds() as f64 / 86_400_000.0;
    Some((days / DAYS_PER_YEAR).max(1.0 / DAYS_PER_YEAR))
}

pub fn followers_friends_relation(followers: u64, friends: u64, age_years: f64) -> f64 {
    if followers == friends {
        1.0 / age_years
    } else {
        (followers as f64 - friends as f64) / age_years
    }
}

pub fn compute_ffr(profile: &UserProfile, capture_at: DateTime<Utc>) -> Result<f64> {
    let age = age_years(profile.created_at, capture_at).ok_or_else(|| Error::InvalidAge {
        user: profile.user_id.to_string(),
    })?;
    Ok(followers_friends_relation(
        profile.followers_count,
        profile.friends_count,
        age,
    ))
}

pub fn normalize_ffr(values: &[f64]) -> Vec<f64> {
    normalize_min_max(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGlobalFeatures {
    pub user_id: UserId,
    pub followers: u64,
    pub friends: u64,
    pub age_years: f64,
    pub ffr: f64,
    pub ffr_normalized: f64,
}

/// `FF_R` and `FF_R'` for every user of the network. Users whose profile is not older
/// than the capture time are skipped with a warning.
pub fn global_features(dataset: &Dataset) -> Vec<UserGlobalFeatures> {
    let mut rows: Vec<UserGlobalFeatures> = dataset
        .users
        .iter()
        .filter_map(|u| match age_years(u.created_at, dataset.capture_at) {
            Some(age) => Some(UserGlobalFeatures {
                user_id: u.user_id.clone(),
                followers: u.followers_count,
                friends: u.friends_count,
                age_years: age,
                ffr: followers_friends_relation(u.followers_count, u.friends_count, age),
                ffr_normalized: 0.0,
            }),
            None => {
                log::warn!("skipping FF_R for {}: created_at not before capture", u.user_id);
                None
            }
        })
        .collect();
    let ffr: Vec<f64> = rows.iter().map(|r| r.ffr).collect();
    for (row, n) in rows.iter_mut().zip(normalize_ffr(&ffr)) {
        row.ffr_normalized = n;
    }
    rows
}
