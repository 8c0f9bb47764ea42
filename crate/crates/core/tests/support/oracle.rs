//! Random micro-datasets and a brute-force recomputation of the credibility features.
//!
//! Shared by the core integration tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use influence_core::annotate::{
    AnnotatedDataset, AnnotatedReply, AnnotatedTweet, AnnotationReport, DomainAnnotation, SentimentScore,
};
use influence_core::corpus::{
    partition_periods, Dataset, Partition, PeriodSpec, ReplyRecord, TweetRecord, UserProfile, YearMonth,
};
use influence_core::features::{
    accumulate_domain_features, global_features, normalize_domain_features, TweetSelection,
};

pub const DOMAINS: [&str; 3] = ["Arts", "Science", "Sports"];

pub struct Micro {
    pub dataset: Dataset,
    pub annotations: AnnotatedDataset,
    pub partition: Partition,
    pub periods: u32,
}

fn month_start(index: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2015 + (index / 12) as i32, index % 12 + 1, 1, 0, 0, 0)
        .unwrap()
}

/// At most 5 users, 20 tweets, 3 domains and 6 monthly periods from January 2015.
pub fn micro_dataset(seed: u64) -> Micro {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_users = rng.random_range(1..=5);
    let n_tweets = rng.random_range(1..=20);
    let periods = rng.random_range(1..=6u32);
    let capture = month_start(periods) + Duration::days(3);

    let users: Vec<UserProfile> = (0..n_users)
        .map(|i| {
            let followers = rng.random_range(0..5000);
            UserProfile {
                user_id: format!("u{i}").into(),
                handle: format!("@u{i}"),
                followers_count: followers,
                friends_count: if rng.random_bool(0.2) {
                    followers
                } else {
                    rng.random_range(0..5000)
                },
                created_at: capture - Duration::hours(rng.random_range(1..24 * 365 * 9)),
            }
        })
        .collect();

    let mut tweets = Vec::new();
    let mut ann_tweets = Vec::new();
    for t in 0..n_tweets {
        // a few tweets fall after the last period
        let month = rng.random_range(0..periods + 1);
        let posted_at = month_start(month) + Duration::minutes(rng.random_range(0..60 * 24 * 27));
        let id = format!("t{t:02}");
        tweets.push(TweetRecord {
            tweet_id: id.as_str().into(),
            author_id: format!("u{}", rng.random_range(0..n_users)).into(),
            posted_at,
            text: String::new(),
            urls: Vec::new(),
            retweet_count: rng.random_range(0..50),
            favorite_count: rng.random_range(0..50),
            replies_count: rng.random_range(0..20),
            is_retweet: false,
            language: Some("en".into()),
        });
        let mut merged = Vec::new();
        for d in DOMAINS {
            if rng.random_bool(0.5) {
                let score = if rng.random_bool(0.1) {
                    0.0
                } else {
                    rng.random_range(0.05..1.0)
                };
                merged.push(DomainAnnotation::new(d, score, rng.random_bool(0.5)));
            }
        }
        let annotatable = merged.iter().any(|d| d.score > 0.0);
        ann_tweets.push(AnnotatedTweet {
            tweet_id: id.as_str().into(),
            text_domains: merged.clone(),
            url_domains: Vec::new(),
            merged_domains: merged,
            annotatable,
        });
    }

    let mut replies = Vec::new();
    let mut ann_replies = Vec::new();
    for r in 0..rng.random_range(0..30) {
        let parent = &tweets[rng.random_range(0..tweets.len())];
        let id = format!("r{r:02}");
        replies.push(ReplyRecord {
            reply_id: id.as_str().into(),
            parent_tweet_id: parent.tweet_id.clone(),
            author_id: format!("u{}", rng.random_range(0..n_users)).into(),
            posted_at: parent.posted_at + Duration::minutes(5),
            text: String::new(),
        });
        // some replies stay unscored
        if rng.random_bool(0.9) {
            let v = match rng.random_range(0..5) {
                0 => 0.0,
                _ => rng.random_range(-1.0..=1.0),
            };
            ann_replies.push(AnnotatedReply {
                reply_id: id.as_str().into(),
                sentiment: SentimentScore::new(v).unwrap(),
            });
        }
    }

    let dataset = Dataset::new(users, tweets, replies, capture, "micro");
    let spec = PeriodSpec {
        start: YearMonth::new(2015, 1).unwrap(),
        periods,
    };
    let partition = partition_periods(&dataset, &spec).unwrap();
    Micro {
        dataset,
        annotations: AnnotatedDataset {
            tweets: ann_tweets,
            replies: ann_replies,
            report: AnnotationReport::default(),
        },
        partition,
        periods,
    }
}

#[derive(Debug, Clone, Default)]
pub struct OracleRow {
    pub r: f64,
    pub l: f64,
    pub p: f64,
    pub sp: f64,
    pub sn: f64,
    pub pos_n: f64,
    pub neg_n: f64,
    pub tweets: u64,
    pub s: f64,
    pub r_norm: f64,
    pub l_norm: f64,
    pub p_norm: f64,
    pub s_norm: f64,
}

/// `None` selects all periods pooled.
pub fn oracle_rows(m: &Micro, period: Option<u32>) -> BTreeMap<(String, String), OracleRow> {
    let in_period = |t: &TweetRecord| {
        let at = t.posted_at;
        let idx = (at.year() - 2015) as u32 * 12 + at.month() - 1;
        idx < m.periods && period.is_none_or(|p| idx + 1 == p)
    };
    let mut rows: BTreeMap<(String, String), OracleRow> = BTreeMap::new();
    for t in m.dataset.tweets.iter().filter(|t| in_period(t)) {
        let a = m.annotations.tweets.iter().find(|a| a.tweet_id == t.tweet_id).unwrap();
        let total: f64 = a.merged_domains.iter().map(|d| d.score).sum();
        if !a.annotatable || total <= 0.0 {
            continue;
        }
        let (mut sp, mut sn, mut pn, mut nn) = (0.0, 0.0, 0.0, 0.0);
        for reply in m.dataset.replies.iter().filter(|r| r.parent_tweet_id == t.tweet_id) {
            if let Some(s) = m.annotations.replies.iter().find(|s| s.reply_id == reply.reply_id) {
                let v = s.sentiment.value();
                if v > 0.0 {
                    sp += v;
                    pn += 1.0;
                }
                if v < 0.0 {
                    sn += v;
                    nn += 1.0;
                }
            }
        }
        for d in a.merged_domains.iter().filter(|d| d.score > 0.0) {
            let w = d.score / total;
            let row = rows.entry((d.label.clone(), t.author_id.0.clone())).or_default();
            row.r += w * t.retweet_count as f64;
            row.l += w * t.favorite_count as f64;
            row.p += w * t.replies_count as f64;
            row.sp += w * sp;
            row.sn += w * sn;
            row.pos_n += w * pn;
            row.neg_n += w * nn;
            row.tweets += 1;
        }
    }
    for row in rows.values_mut() {
        row.s = row.sp - row.sn.abs();
    }
    for d in DOMAINS {
        let keys: Vec<_> = rows.keys().filter(|k| k.0 == d).cloned().collect();
        if keys.is_empty() {
            continue;
        }
        let max = |f: fn(&OracleRow) -> f64| keys.iter().map(|k| f(&rows[k])).fold(f64::MIN, f64::max);
        let min = |f: fn(&OracleRow) -> f64| keys.iter().map(|k| f(&rows[k])).fold(f64::MAX, f64::min);
        let (mr, ml, mp) = (max(|r| r.r), max(|r| r.l), max(|r| r.p));
        let (smin, smax) = (min(|r| r.s), max(|r| r.s));
        for k in &keys {
            let row = rows.get_mut(k).unwrap();
            row.r_norm = if mr > 0.0 { row.r / mr } else { 0.0 };
            row.l_norm = if ml > 0.0 { row.l / ml } else { 0.0 };
            row.p_norm = if mp > 0.0 { row.p / mp } else { 0.0 };
            row.s_norm = if smax > smin {
                (row.s - smin) / (smax - smin)
            } else {
                1.0
            };
        }
    }
    rows
}

/// `(user, FF_R, FF_R')` recomputed from the profiles.
pub fn oracle_ffr(m: &Micro) -> Vec<(String, f64, f64)> {
    let raw: Vec<(String, f64)> = m
        .dataset
        .users
        .iter()
        .map(|u| {
            let days = (m.dataset.capture_at - u.created_at).num_seconds() as f64 / 86_400.0;
            let age = (days / 365.25).max(1.0 / 365.25);
            let ffr = if u.followers_count == u.friends_count {
                1.0 / age
            } else {
                (u.followers_count as f64 - u.friends_count as f64) / age
            };
            (u.user_id.0.clone(), ffr)
        })
        .collect();
    let lo = raw.iter().map(|r| r.1).fold(f64::MAX, f64::min);
    let hi = raw.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    raw.into_iter()
        .map(|(u, v)| {
            let n = if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
            (u, v, n)
        })
        .collect()
}

fn close(what: &str, a: f64, b: f64) -> Result<(), String> {
    if (a - b).abs() <= 1e-12 * (1.0 + b.abs()) {
        Ok(())
    } else {
        Err(format!("{what}: pipeline {a} vs oracle {b}"))
    }
}

/// Compares every per-period and pooled field, plus `FF_R` and `FF_R'`.
pub fn check_against_oracle(m: &Micro) -> Result<(), String> {
    let mut selections: Vec<(Option<u32>, TweetSelection)> = m
        .partition
        .slices
        .iter()
        .map(|s| (Some(s.index), TweetSelection::period(s)))
        .collect();
    selections.push((None, TweetSelection::pooled(&m.partition)));
    for (period, sel) in selections {
        let raw = accumulate_domain_features(&m.dataset, &m.annotations, &sel);
        let norm = normalize_domain_features(&raw);
        let expected = oracle_rows(m, period);
        if raw.len() != expected.len() {
            return Err(format!(
                "period {period:?}: {} rows vs oracle {}",
                raw.len(),
                expected.len()
            ));
        }
        for (r, n) in raw.iter().zip(&norm) {
            let key = (r.domain.clone(), r.user_id.0.clone());
            let e = expected
                .get(&key)
                .ok_or_else(|| format!("period {period:?}: unexpected row {key:?}"))?;
            let tag = |f: &str| format!("period {period:?} {key:?} {f}");
            close(&tag("R"), r.retweets, e.r)?;
            close(&tag("L"), r.likes, e.l)?;
            close(&tag("P"), r.replies, e.p)?;
            close(&tag("SP"), r.positive_sum, e.sp)?;
            close(&tag("SN"), r.negative_sum, e.sn)?;
            close(&tag("S"), r.sentiment, e.s)?;
            close(&tag("pos count"), r.positive_count, e.pos_n)?;
            close(&tag("neg count"), r.negative_count, e.neg_n)?;
            if r.domain_tweet_count != e.tweets {
                return Err(tag("tweet count"));
            }
            close(&tag("R'"), n.retweets, e.r_norm)?;
            close(&tag("L'"), n.likes, e.l_norm)?;
            close(&tag("P'"), n.replies, e.p_norm)?;
            close(&tag("S'"), n.sentiment, e.s_norm)?;
        }
    }
    let global = global_features(&m.dataset);
    let expected = oracle_ffr(m);
    if global.len() != expected.len() {
        return Err("FF_R row count".into());
    }
    for (g, (u, ffr, norm)) in global.iter().zip(&expected) {
        if &g.user_id.0 != u {
            return Err(format!("FF_R user order: {} vs {u}", g.user_id));
        }
        close(&format!("{u} FF_R"), g.ffr, *ffr)?;
        close(&format!("{u} FF_R'"), g.ffr_normalized, *norm)?;
    }
    Ok(())
}
