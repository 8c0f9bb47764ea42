use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Dataset, TweetRecord};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanseOptions {
    /// Treat tweets without a language tag as English instead of removing them.
    #[serde(default)]
    pub keep_untagged_language: bool,
    /// Drop users (and their content) whose friends count is at or above this bound.
    #[serde(default)]
    pub max_friends: Option<u64>,
}

/// Per-rule removal counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanseReport {
    pub language_removed: usize,
    pub replies_removed_with_tweet: usize,
    pub retweets_zeroed: usize,
    pub owner_replies_removed: usize,
    pub users_filtered: usize,
    pub tweets_removed_with_user: usize,
    pub replies_removed_with_user: usize,
}

pub fn is_english(tweet: &TweetRecord, keep_untagged: bool) -> bool {
    match tweet.language.as_deref() {
        None | Some("") | Some("und") => keep_untagged,
        Some(tag) => {
            let primary = tag.split(['-', '_']).next().unwrap_or("");
            primary.eq_ignore_ascii_case("en")
        }
    }
}

/// Applies the cleansing rules and returns the cleansed dataset with removal counts.
///
/// Rules, in order: optional friends-count user filter; non-English tweets are removed
/// together with their replies; retweets keep their text but lose their engagement
/// counts; replies written by the parent tweet's author are removed.
pub fn cleanse(dataset: &Dataset, options: &CleanseOptions) -> (Dataset, CleanseReport) {
    let mut report = CleanseReport::default();

    let mut users = dataset.users.clone();
    if let Some(bound) = options.max_friends {
        users.retain(|u| {
            let keep = u.friends_count < bound;
            if !keep {
                report.users_filtered += 1;
            }
            keep
        });
    }
    let kept_users: BTreeSet<_> = users.iter().map(|u| &u.user_id).collect();

    let mut tweets = Vec::with_capacity(dataset.tweets.len());
    for tweet in &dataset.tweets {
        if !kept_users.contains(&tweet.author_id) {
            report.tweets_removed_with_user += 1;
            continue;
        }
        if !is_english(tweet, options.keep_untagged_language) {
            report.language_removed += 1;
            continue;
        }
        let mut tweet = tweet.clone();
        if tweet.is_retweet {
            if tweet.retweet_count != 0 || tweet.favorite_count != 0 || tweet.replies_count != 0 {
                report.retweets_zeroed += 1;
            }
            tweet.retweet_count = 0;
            tweet.favorite_count = 0;
            tweet.replies_count = 0;
        }
        tweets.push(tweet);
    }

    let mut replies = Vec::with_capacity(dataset.replies.len());
    for reply in &dataset.replies {
        if !kept_users.contains(&reply.author_id) {
            report.replies_removed_with_user += 1;
            continue;
        }
        let parent = tweets
            .binary_search_by(|t| t.tweet_id.cmp(&reply.parent_tweet_id))
            .ok()
            .map(|i| &tweets[i]);
        match parent {
            None => report.replies_removed_with_tweet += 1,
            Some(parent) if parent.author_id == reply.author_id => report.owner_replies_removed += 1,
            Some(_) => replies.push(reply.clone()),
        }
    }

    let cleansed = Dataset {
        users,
        tweets,
        replies,
        capture_at: dataset.capture_at,
        provenance: dataset.provenance.clone(),
    };
    (cleansed, report)
}
