//! Corpus data model: users, tweets, replies and the datasets that hold them.
//!
//! Datasets are kept in canonical order (sorted by id) so that every downstream
//! computation is independent of the order records arrived in.

mod archive;
mod cleanse;
mod period;
mod synth;

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use archive::{load_dataset, parse_archive, save_dataset, write_archive, LoadOptions, LoadReport, LoadedDataset};
pub use cleanse::{cleanse, is_english, CleanseOptions, CleanseReport};
pub use period::{covering_period_spec, partition_periods, Partition, PeriodSlice, PeriodSpec, YearMonth};
pub use synth::{synthesize, EngagementModel, SynthConfig};

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

id_newtype!(
    /// Opaque user identifier.
    UserId
);
id_newtype!(
    /// Opaque tweet identifier.
    TweetId
);
id_newtype!(
    /// Opaque reply identifier.
    ReplyId
);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: UserId,
    pub handle: String,
    pub followers_count: u64,
    pub friends_count: u64,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: TweetId,
    pub author_id: UserId,
    pub posted_at: DateTime<Utc>,
    pub text: String,
    #[serde(default)]
    pub urls: Vec<String>,
    pub retweet_count: u64,
    pub favorite_count: u64,
    pub replies_count: u64,
    #[serde(default)]
    pub is_retweet: bool,
    #[serde(default)]
    pub language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyRecord {
    pub reply_id: ReplyId,
    pub parent_tweet_id: TweetId,
    pub author_id: UserId,
    pub posted_at: DateTime<Utc>,
    pub text: String,
}

/// A cleansed or raw collection of users, tweets and replies, sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub users: Vec<UserProfile>,
    pub tweets: Vec<TweetRecord>,
    pub replies: Vec<ReplyRecord>,
    pub capture_at: DateTime<Utc>,
    pub provenance: String,
}

impl Dataset {
    /// Builds a dataset, sorting every collection into canonical id order.
    pub fn new(
        mut users: Vec<UserProfile>,
        mut tweets: Vec<TweetRecord>,
        mut replies: Vec<ReplyRecord>,
        capture_at: DateTime<Utc>,
        provenance: impl Into<String>,
    ) -> Self {
        users.sort_by(|a, b| a.user_id.cmp(&b.user_id));
        tweets.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
        replies.sort_by(|a, b| a.reply_id.cmp(&b.reply_id));
        Dataset {
            users,
            tweets,
            replies,
            capture_at,
            provenance: provenance.into(),
        }
    }

    pub fn empty(capture_at: DateTime<Utc>) -> Self {
        Dataset::new(Vec::new(), Vec::new(), Vec::new(), capture_at, "")
    }

    pub fn user(&self, id: &UserId) -> Option<&UserProfile> {
        self.users
            .binary_search_by(|u| u.user_id.cmp(id))
            .ok()
            .map(|i| &self.users[i])
    }

    pub fn tweet(&self, id: &TweetId) -> Option<&TweetRecord> {
        self.tweets
            .binary_search_by(|t| t.tweet_id.cmp(id))
            .ok()
            .map(|i| &self.tweets[i])
    }

    /// Replies grouped by the tweet they answer.
    pub fn replies_by_parent(&self) -> BTreeMap<&TweetId, Vec<&ReplyRecord>> {
        let mut map: BTreeMap<&TweetId, Vec<&ReplyRecord>> = BTreeMap::new();
        for reply in &self.replies {
            map.entry(&reply.parent_tweet_id).or_default().push(reply);
        }
        map
    }
}

/// Binary influence class; `Influencer` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Influencer,
    NonInfluencer,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Influencer
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Label::Influencer
        } else {
            Label::NonInfluencer
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Influencer => "influencer",
            Label::NonInfluencer => "non_influencer",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "influencer" | "influence" | "1" | "true" => Ok(Label::Influencer),
            "non_influencer" | "non_influence" | "noninfluencer" | "0" | "false" => Ok(Label::NonInfluencer),
            other => Err(crate::Error::InvalidData(format!("unknown label `{other}`"))),
        }
    }
}

/// Hand- or plant-assigned influence labels for one domain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruthLabels {
    pub domain: String,
    pub labels: BTreeMap<UserId, Label>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    user_id: String,
    domain: String,
    label: Label,
}

impl GroundTruthLabels {
    pub fn get(&self, user: &UserId) -> Option<Label> {
        self.labels.get(user).copied()
    }

    pub fn positives(&self) -> usize {
        self.labels.values().filter(|l| l.is_positive()).count()
    }

    /// Checks that every labeled user exists in the dataset.
    pub fn validate_against(&self, dataset: &Dataset) -> crate::Result<()> {
        match self.labels.keys().find(|id| dataset.user(id).is_none()) {
            Some(id) => Err(crate::Error::InvalidData(format!(
                "labeled user `{id}` is not in the dataset"
            ))),
            None => Ok(()),
        }
    }

    /// Reads a `user_id,domain,label` CSV file.
    pub fn read_csv(path: &std::path::Path) -> crate::Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| crate::Error::io(path, e))?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> crate::Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut out = GroundTruthLabels::default();
        for row in rdr.deserialize::<LabelRow>() {
            let row = row?;
            if out.domain.is_empty() {
                out.domain = row.domain.clone();
            } else if out.domain != row.domain {
                return Err(crate::Error::InvalidData(format!(
                    "labels file mixes domains `{}` and `{}`",
                    out.domain, row.domain
                )));
            }
            out.labels.insert(UserId(row.user_id), row.label);
        }
        Ok(out)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> crate::Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (user, label) in &self.labels {
            wtr.serialize(LabelRow {
                user_id: user.0.clone(),
                domain: self.domain.clone(),
                label: *label,
            })?;
        }
        wtr.flush().map_err(|e| crate::Error::io("<labels>", e))?;
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use chrono::TimeZone;

    pub fn ts(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 12, 0, 0).unwrap()
    }

    pub fn user(id: &str, followers: u64, friends: u64) -> UserProfile {
        UserProfile {
            user_id: id.into(),
            handle: format!("@{id}"),
            followers_count: followers,
            friends_count: friends,
            created_at: ts(2010, 1, 1),
        }
    }

    pub fn tweet(id: &str, author: &str, at: DateTime<Utc>, text: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author_id: author.into(),
            posted_at: at,
            text: text.into(),
            urls: Vec::new(),
            retweet_count: 0,
            favorite_count: 0,
            replies_count: 0,
            is_retweet: false,
            language: Some("en".into()),
        }
    }

    pub fn reply(id: &str, parent: &str, author: &str, at: DateTime<Utc>, text: &str) -> ReplyRecord {
        ReplyRecord {
            reply_id: id.into(),
            parent_tweet_id: parent.into(),
            author_id: author.into(),
            posted_at: at,
            text: text.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_parsing_accepts_common_spellings() {
        assert_eq!("Influencer".parse::<Label>().unwrap(), Label::Influencer);
        assert_eq!("non-influencer".parse::<Label>().unwrap(), Label::NonInfluencer);
        assert_eq!("0".parse::<Label>().unwrap(), Label::NonInfluencer);
        assert!("maybe".parse::<Label>().is_err());
    }

    #[test]
    fn labels_csv_round_trip() {
        let mut labels = GroundTruthLabels {
            domain: "Sports".into(),
            ..Default::default()
        };
        labels.labels.insert("b".into(), Label::NonInfluencer);
        labels.labels.insert("a".into(), Label::Influencer);
        let mut buf = Vec::new();
        labels.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("user_id,domain,label\na,Sports,influencer\n"));
        let back = GroundTruthLabels::from_csv_reader(&buf[..]).unwrap();
        assert_eq!(back, labels);
    }
}
