//! Synthetic tweet archives with planted influencers.
//!
//! Generative model, per user and per monthly period:
//!
//! - `k = max(1, floor(n_users * influencer_fraction))` users are drawn uniformly as
//!   planted influencers of the target domain (the first configured domain).
//! - Followers are drawn from `influencer_followers` for influencers and
//!   `other_followers` otherwise; friends from `friends` for everyone.
//! - Each user posts a uniform number of tweets in `tweets_per_period`. An influencer's
//!   tweet is about the target domain with probability `influencer_focus`, otherwise about
//!   a uniformly chosen domain; other users always pick uniformly.
//! - Tweet text mixes 2–4 terms of the chosen domain's lexicon with filler words.
//! - Retweet, favorite and reply counts are uniform on `[0, 2m]` (mean `m`) with `m` the
//!   base rate, multiplied by `influencer_boost` on an influencer's target-domain tweets.
//! - One reply record is generated per counted reply. Its sentiment word is positive with
//!   probability `positive_reply_rate_influencer` on boosted tweets and
//!   `positive_reply_rate_other` elsewhere. A share of replies is written by the tweet's
//!   owner, a share of tweets are retweets and a share are non-English, so the cleansing
//!   rules have work to do.

use chrono::Duration;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, GroundTruthLabels, Label, PeriodSpec, ReplyRecord, TweetRecord, UserId, UserProfile, YearMonth};
use crate::annotate::{SentimentLexicon, TaxonomyLexicon};
use crate::{Error, Result};

const FILLER: &[&str] = &[
    "today", "just", "really", "about", "with", "this", "some", "thoughts", "check", "here", "our", "week", "more",
    "via", "now",
];
const FOREIGN: &[&str] = &["bonjour", "le", "monde", "merci", "avec", "nous", "sur"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngagementModel {
    pub base_retweets: f64,
    pub base_favorites: f64,
    pub base_replies: f64,
    pub influencer_boost: f64,
    pub influencer_focus: f64,
    pub positive_reply_rate_influencer: f64,
    pub positive_reply_rate_other: f64,
    pub influencer_followers: (u64, u64),
    pub other_followers: (u64, u64),
    pub friends: (u64, u64),
}

impl Default for EngagementModel {
    fn default() -> Self {
        EngagementModel {
            base_retweets: 2.0,
            base_favorites: 3.0,
            base_replies: 1.0,
            influencer_boost: 8.0,
            influencer_focus: 0.8,
            positive_reply_rate_influencer: 0.85,
            positive_reply_rate_other: 0.45,
            influencer_followers: (3000, 12000),
            other_followers: (50, 1500),
            friends: (50, 1500),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_domains: usize,
    pub influencer_fraction: f64,
    pub periods: u32,
    pub start: YearMonth,
    pub tweets_per_period: (u32, u32),
    pub retweet_rate: f64,
    pub foreign_language_rate: f64,
    pub owner_reply_rate: f64,
    pub max_replies_per_tweet: u64,
    pub engagement: EngagementModel,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_users: 400,
            n_domains: 4,
            influencer_fraction: 0.2,
            periods: 6,
            start: YearMonth { year: 2014, month: 7 },
            tweets_per_period: (2, 6),
            retweet_rate: 0.1,
            foreign_language_rate: 0.03,
            owner_reply_rate: 0.05,
            max_replies_per_tweet: 40,
            engagement: EngagementModel::default(),
        }
    }
}

impl SynthConfig {
    pub fn period_spec(&self) -> PeriodSpec {
        PeriodSpec {
            start: self.start,
            periods: self.periods,
        }
    }

    pub fn influencer_count(&self) -> usize {
        ((self.n_users as f64 * self.influencer_fraction).floor() as usize).max(1)
    }

    fn validate(&self, available_domains: usize) -> Result<()> {
        if self.n_users < 2 {
            return Err(Error::Config("synthesize needs at least 2 users".into()));
        }
        if self.periods == 0 {
            return Err(Error::Config("synthesize needs at least 1 period".into()));
        }
        if !(self.influencer_fraction > 0.0 && self.influencer_fraction < 1.0) {
            return Err(Error::Config("influencer_fraction must lie in (0, 1)".into()));
        }
        if self.n_domains == 0 || self.n_domains > available_domains {
            return Err(Error::Config(format!("n_domains must be in 1..={available_domains}")));
        }
        let (lo, hi) = self.tweets_per_period;
        if lo > hi {
            return Err(Error::Config("tweets_per_period range is inverted".into()));
        }
        for (name, (lo, hi)) in [
            ("influencer_followers", self.engagement.influencer_followers),
            ("other_followers", self.engagement.other_followers),
            ("friends", self.engagement.friends),
        ] {
            if lo > hi {
                return Err(Error::Config(format!("{name} range is inverted")));
            }
        }
        Ok(())
    }
}

/// Draws a count uniformly from `[0, round(2 * mean)]`.
fn draw_count(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    let hi = (2.0 * mean).round().max(0.0) as u64;
    rng.random_range(0..=hi)
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

/// Generates a dataset and the labels of its planted influencers. Pure in `(config, seed)`.
pub fn synthesize(config: &SynthConfig, seed: u64) -> Result<(Dataset, GroundTruthLabels)> {
    let taxonomy = TaxonomyLexicon::builtin();
    let sentiment = SentimentLexicon::builtin();
    config.validate(taxonomy.domains().count())?;

    let domains: Vec<&str> = taxonomy.domains().take(config.n_domains).collect();
    let vocab: Vec<Vec<&str>> = domains
        .iter()
        .map(|d| {
            taxonomy
                .terms(d)
                .expect("domain exists")
                .iter()
                .map(String::as_str)
                .collect()
        })
        .collect();
    let positive: Vec<&str> = sentiment.terms_with_polarity(1).collect();
    let negative: Vec<&str> = sentiment.terms_with_polarity(-1).collect();
    let model = &config.engagement;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.n_users;
    let width = n.to_string().len().max(4);
    let mut is_influencer = vec![false; n];
    for i in sample(&mut rng, n, config.influencer_count()) {
        is_influencer[i] = true;
    }

    let spec = config.period_spec();
    let (range_start, range_end) = spec.range();
    let capture_at = range_end + Duration::days(1);

    let user_ids: Vec<UserId> = (0..n).map(|i| UserId(format!("u{i:0width$}"))).collect();
    let users: Vec<UserProfile> = (0..n)
        .map(|i| {
            let (lo, hi) = if is_influencer[i] {
                model.influencer_followers
            } else {
                model.other_followers
            };
            let age_days = rng.random_range(30..=8 * 365);
            UserProfile {
                user_id: user_ids[i].clone(),
                handle: format!("user{i:0width$}"),
                followers_count: rng.random_range(lo..=hi),
                friends_count: rng.random_range(model.friends.0..=model.friends.1),
                created_at: range_start - Duration::days(age_days),
            }
        })
        .collect();

    let mut tweets = Vec::new();
    let mut replies = Vec::new();
    for (u, author) in user_ids.iter().enumerate() {
        for p in 0..config.periods {
            let month_start = spec.start.plus_months(p).start();
            let month_secs = (spec.start.plus_months(p + 1).start() - month_start).num_seconds();
            let count = rng.random_range(config.tweets_per_period.0..=config.tweets_per_period.1);
            for _ in 0..count {
                let posted_at = month_start + Duration::seconds(rng.random_range(0..month_secs));
                let topic = if is_influencer[u] && rng.random_bool(model.influencer_focus) {
                    0
                } else {
                    rng.random_range(0..domains.len())
                };
                let boosted = is_influencer[u] && topic == 0;
                let boost = if boosted { model.influencer_boost } else { 1.0 };

                let mut words: Vec<&str> = Vec::new();
                for _ in 0..rng.random_range(2..=4) {
                    words.push(pick(&mut rng, &vocab[topic]));
                }
                for _ in 0..rng.random_range(1..=3) {
                    words.push(pick(&mut rng, FILLER));
                }

                let is_retweet = rng.random_bool(config.retweet_rate);
                let foreign = rng.random_bool(config.foreign_language_rate);
                let (text, language) = if foreign {
                    let w: Vec<&str> = (0..4).map(|_| pick(&mut rng, FOREIGN)).collect();
                    (w.join(" "), "fr")
                } else if is_retweet {
                    (format!("RT {}", words.join(" ")), "en")
                } else {
                    (words.join(" "), "en")
                };

                let retweet_count = draw_count(&mut rng, model.base_retweets * boost);
                let favorite_count = draw_count(&mut rng, model.base_favorites * boost);
                let reply_total = draw_count(&mut rng, model.base_replies * boost).min(config.max_replies_per_tweet);
                let tweet_id = format!("t{:08}", tweets.len());
                let positive_rate = if boosted {
                    model.positive_reply_rate_influencer
                } else {
                    model.positive_reply_rate_other
                };
                for _ in 0..reply_total {
                    let replier = if rng.random_bool(config.owner_reply_rate) {
                        u
                    } else {
                        let other = rng.random_range(0..n - 1);
                        if other >= u {
                            other + 1
                        } else {
                            other
                        }
                    };
                    let mood = if rng.random_bool(positive_rate) {
                        pick(&mut rng, &positive)
                    } else {
                        pick(&mut rng, &negative)
                    };
                    let text = format!("{mood} {} {}", pick(&mut rng, FILLER), pick(&mut rng, FILLER));
                    let delay = Duration::minutes(rng.random_range(1..=3 * 24 * 60));
                    replies.push(ReplyRecord {
                        reply_id: format!("r{:09}", replies.len()).into(),
                        parent_tweet_id: tweet_id.clone().into(),
                        author_id: user_ids[replier].clone(),
                        posted_at: (posted_at + delay).min(capture_at - Duration::seconds(1)),
                        text,
                    });
                }
                tweets.push(TweetRecord {
                    tweet_id: tweet_id.into(),
                    author_id: author.clone(),
                    posted_at,
                    text,
                    urls: Vec::new(),
                    retweet_count,
                    favorite_count,
                    replies_count: reply_total,
                    is_retweet,
                    language: Some(language.into()),
                });
            }
        }
    }

    let labels = GroundTruthLabels {
        domain: domains[0].to_owned(),
        labels: user_ids
            .iter()
            .zip(&is_influencer)
            .map(|(id, &inf)| (id.clone(), Label::from_positive(inf)))
            .collect(),
    };
    let provenance = format!("synthetic seed={seed} users={n} domains={}", config.n_domains);
    Ok((Dataset::new(users, tweets, replies, capture_at, provenance), labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::tokenize;
    use crate::corpus::write_archive;

    fn small() -> SynthConfig {
        SynthConfig {
            n_users: 100,
            influencer_fraction: 0.1,
            periods: 2,
            ..Default::default()
        }
    }

    #[test]
    fn influencer_count_rounding() {
        let (_, labels) = synthesize(&small(), 1).unwrap();
        assert_eq!(labels.positives(), 10);
        let tiny = SynthConfig {
            n_users: 3,
            influencer_fraction: 0.1,
            ..small()
        };
        assert_eq!(tiny.influencer_count(), 1);
    }

    #[test]
    fn fixed_seed_is_byte_identical() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_archive(&synthesize(&small(), 9).unwrap().0, &mut a).unwrap();
        write_archive(&synthesize(&small(), 9).unwrap().0, &mut b).unwrap();
        assert_eq!(a, b);
        let mut c = Vec::new();
        write_archive(&synthesize(&small(), 10).unwrap().0, &mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_configs_are_rejected() {
        for bad in [
            SynthConfig { n_users: 0, ..small() },
            SynthConfig { n_users: 1, ..small() },
            SynthConfig { periods: 0, ..small() },
            SynthConfig {
                influencer_fraction: 0.0,
                ..small()
            },
            SynthConfig {
                influencer_fraction: 1.0,
                ..small()
            },
            SynthConfig {
                n_domains: 99,
                ..small()
            },
        ] {
            assert!(synthesize(&bad, 1).is_err());
        }
    }

    #[test]
    fn references_resolve_and_labels_cover_users() {
        let (ds, labels) = synthesize(&small(), 3).unwrap();
        labels.validate_against(&ds).unwrap();
        assert_eq!(labels.labels.len(), ds.users.len());
        for r in &ds.replies {
            assert!(ds.tweet(&r.parent_tweet_id).is_some());
        }
        for u in &ds.users {
            assert!(u.created_at < ds.capture_at);
        }
    }

    #[test]
    fn filler_words_are_outside_the_lexicons() {
        let taxonomy = TaxonomyLexicon::builtin();
        let sentiment = SentimentLexicon::builtin();
        for w in FILLER.iter().chain(FOREIGN) {
            let t: Vec<_> = tokenize(w).collect();
            assert_eq!(t.len(), 1);
            assert!(sentiment.polarity(&t[0]).is_none(), "{w}");
            for d in taxonomy.domains() {
                assert!(!taxonomy.terms(d).unwrap().contains(&t[0]), "{w}");
            }
        }
    }
}
