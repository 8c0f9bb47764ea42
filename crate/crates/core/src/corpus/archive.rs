//! Archive-lines reader and writer.
//!
//! One JSON envelope per line: `{"kind": "user" | "tweet" | "reply" | "meta", "body": {...}}`.
//! Blank lines are ignored. The optional `meta` envelope carries the capture timestamp and a
//! provenance note; the canonical writer always emits it first.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Dataset, ReplyRecord, TweetRecord, UserProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Abort on the first malformed line instead of skipping and counting it.
    pub fail_fast: bool,
    /// Capture timestamp used when the archive has no `meta` envelope.
    pub capture_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub lines_read: usize,
    /// 1-based line numbers of skipped malformed lines.
    pub malformed_lines: Vec<usize>,
    pub tweets_missing_author: usize,
    pub replies_missing_author: usize,
    pub replies_missing_parent: usize,
}

impl LoadReport {
    pub fn quarantined(&self) -> usize {
        self.tweets_missing_author + self.replies_missing_author + self.replies_missing_parent
    }

    pub fn warnings(&self) -> usize {
        self.quarantined() + self.malformed_lines.len()
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub report: LoadReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Meta {
    capture_at: DateTime<Utc>,
    #[serde(default)]
    provenance: String,
}

#[derive(Deserialize)]
#[serde(tag = "kind", content = "body", rename_all = "lowercase")]
enum Envelope {
    Meta(Meta),
    User(UserProfile),
    Tweet(TweetRecord),
    Reply(ReplyRecord),
}

#[derive(Serialize)]
#[serde(tag = "kind", content = "body", rename_all = "lowercase")]
enum EnvelopeRef<'a> {
    Meta(&'a Meta),
    User(&'a UserProfile),
    Tweet(&'a TweetRecord),
    Reply(&'a ReplyRecord),
}

pub fn load_dataset(path: &Path, options: &LoadOptions) -> Result<LoadedDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_archive(BufReader::new(file), options).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_archive<R: Read>(reader: R, options: &LoadOptions) -> Result<LoadedDataset> {
    let mut report = LoadReport::default();
    let mut meta: Option<Meta> = None;
    let mut users = Vec::new();
    let mut tweets = Vec::new();
    let mut replies = Vec::new();

    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<archive>", e))?;
        report.lines_read += 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Envelope>(&line) {
            Ok(Envelope::Meta(m)) => meta = Some(m),
            Ok(Envelope::User(u)) => users.push(u),
            Ok(Envelope::Tweet(t)) => tweets.push(t),
            Ok(Envelope::Reply(r)) => replies.push(r),
            Err(e) if options.fail_fast => {
                return Err(Error::MalformedLine {
                    line: line_no,
                    message: e.to_string(),
                })
            }
            Err(e) => {
                log::warn!("skipping malformed line {line_no}: {e}");
                report.malformed_lines.push(line_no);
            }
        }
    }

    users.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    check_unique("user", users.iter().map(|u| u.user_id.as_str()))?;
    tweets.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    check_unique("tweet", tweets.iter().map(|t| t.tweet_id.as_str()))?;
    replies.sort_by(|a, b| a.reply_id.cmp(&b.reply_id));
    check_unique("reply", replies.iter().map(|r| r.reply_id.as_str()))?;

    let user_ids: BTreeSet<_> = users.iter().map(|u| u.user_id.clone()).collect();
    tweets.retain(|t| {
        let ok = user_ids.contains(&t.author_id);
        if !ok {
            log::warn!("quarantining tweet {}: unknown author {}", t.tweet_id, t.author_id);
            report.tweets_missing_author += 1;
        }
        ok
    });
    let tweet_ids: BTreeSet<_> = tweets.iter().map(|t| t.tweet_id.clone()).collect();
    replies.retain(|r| {
        if !user_ids.contains(&r.author_id) {
            log::warn!("quarantining reply {}: unknown author {}", r.reply_id, r.author_id);
            report.replies_missing_author += 1;
            false
        } else if !tweet_ids.contains(&r.parent_tweet_id) {
            log::warn!(
                "quarantining reply {}: unknown parent {}",
                r.reply_id,
                r.parent_tweet_id
            );
            report.replies_missing_parent += 1;
            false
        } else {
            true
        }
    });

    let (capture_at, provenance) = match meta {
        Some(m) => (m.capture_at, m.provenance),
        None => (
            options
                .capture_at
                .unwrap_or_else(|| latest_timestamp(&users, &tweets, &replies)),
            String::new(),
        ),
    };

    Ok(LoadedDataset {
        dataset: Dataset {
            users,
            tweets,
            replies,
            capture_at,
            provenance,
        },
        report,
    })
}

fn check_unique<'a>(kind: &'static str, sorted_ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut prev: Option<&str> = None;
    for id in sorted_ids {
        if prev == Some(id) {
            return Err(Error::DuplicateId {
                kind,
                id: id.to_owned(),
            });
        }
        prev = Some(id);
    }
    Ok(())
}

fn latest_timestamp(users: &[UserProfile], tweets: &[TweetRecord], replies: &[ReplyRecord]) -> DateTime<Utc> {
    users
        .iter()
        .map(|u| u.created_at)
        .chain(tweets.iter().map(|t| t.posted_at))
        .chain(replies.iter().map(|r| r.posted_at))
        .max()
        .unwrap_or(DateTime::<Utc>::UNIX_EPOCH)
}

/// Writes the canonical serialization: meta, then users, tweets and replies in id order.
pub fn write_archive<W: Write>(dataset: &Dataset, mut writer: W) -> Result<()> {
    let meta = Meta {
        capture_at: dataset.capture_at,
        provenance: dataset.provenance.clone(),
    };
    let mut emit = |env: EnvelopeRef<'_>| -> Result<()> {
        serde_json::to_writer(&mut writer, &env)?;
        writer.write_all(b"\n").map_err(|e| Error::io("<archive>", e))
    };
    emit(EnvelopeRef::Meta(&meta))?;
    let mut users: Vec<_> = dataset.users.iter().collect();
    users.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    for u in users {
        emit(EnvelopeRef::User(u))?;
    }
    let mut tweets: Vec<_> = dataset.tweets.iter().collect();
    tweets.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    for t in tweets {
        emit(EnvelopeRef::Tweet(t))?;
    }
    let mut replies: Vec<_> = dataset.replies.iter().collect();
    replies.sort_by(|a, b| a.reply_id.cmp(&b.reply_id));
    for r in replies {
        emit(EnvelopeRef::Reply(r))?;
    }
    Ok(())
}

pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    write_archive(dataset, &mut writer)?;
    writer.flush().map_err(|e| Error::io(path, e))
}
