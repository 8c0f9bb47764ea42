use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    merge_domains, validate_annotations, Annotator, AnnotatorError, DomainAnnotation, SentimentScore, UrlTextResolver,
};
use crate::corpus::{Dataset, ReplyId, TweetId, TweetRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedTweet {
    pub tweet_id: TweetId,
    pub text_domains: Vec<DomainAnnotation>,
    pub url_domains: Vec<DomainAnnotation>,
    pub merged_domains: Vec<DomainAnnotation>,
    pub annotatable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedReply {
    pub reply_id: ReplyId,
    pub sentiment: SentimentScore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationFailure {
    pub kind: String,
    pub id: String,
    pub retriable: bool,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationReport {
    pub tweets_total: usize,
    pub annotatable: usize,
    pub not_annotatable: usize,
    pub replies_scored: usize,
    pub failures: Vec<AnnotationFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDataset {
    /// One entry per dataset tweet, in tweet-id order.
    pub tweets: Vec<AnnotatedTweet>,
    /// Successfully scored replies, in reply-id order.
    pub replies: Vec<AnnotatedReply>,
    pub report: AnnotationReport,
}

impl AnnotatedDataset {
    pub fn tweet(&self, id: &TweetId) -> Option<&AnnotatedTweet> {
        self.tweets
            .binary_search_by(|t| t.tweet_id.cmp(id))
            .ok()
            .map(|i| &self.tweets[i])
    }

    pub fn save(&self, path: &std::path::Path) -> crate::Result<()> {
        let json = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, json).map_err(|e| crate::Error::io(path, e))
    }

    /// Reads a file written by [`AnnotatedDataset::save`].
    pub fn load(path: &std::path::Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        let mut out: AnnotatedDataset = serde_json::from_str(&text)?;
        out.tweets.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
        out.replies.sort_by(|a, b| a.reply_id.cmp(&b.reply_id));
        Ok(out)
    }

    pub fn reply_sentiment(&self, id: &ReplyId) -> Option<SentimentScore> {
        self.replies
            .binary_search_by(|r| r.reply_id.cmp(id))
            .ok()
            .map(|i| self.replies[i].sentiment)
    }
}

fn taxonomy(annotator: &dyn Annotator, text: &str) -> Result<Vec<DomainAnnotation>, AnnotatorError> {
    let out = annotator.infer_taxonomy(text)?;
    validate_annotations(&out)?;
    Ok(out)
}

fn annotate_tweet(
    tweet: &TweetRecord,
    annotator: &dyn Annotator,
    resolver: Option<&dyn UrlTextResolver>,
) -> Result<AnnotatedTweet, AnnotatorError> {
    let text_domains = taxonomy(annotator, &tweet.text)?;
    let mut url_domains = Vec::new();
    if let Some(resolver) = resolver {
        for url in &tweet.urls {
            if let Some(content) = resolver.resolve(url) {
                let found = taxonomy(annotator, &content)?;
                url_domains = merge_domains(&url_domains, &found);
            }
        }
    }
    let merged_domains = merge_domains(&text_domains, &url_domains);
    let annotatable = !merged_domains.is_empty() && merged_domains.iter().any(|d| d.score > 0.0);
    Ok(AnnotatedTweet {
        tweet_id: tweet.tweet_id.clone(),
        text_domains,
        url_domains,
        merged_domains,
        annotatable,
    })
}

/// Annotates every tweet independently and scores every reply's sentiment.
///
/// Provider failures never abort the run: the affected tweet is marked not annotatable
/// (or the reply left unscored) and the failure is listed in the report.
pub fn annotate_dataset(
    dataset: &Dataset,
    annotator: &dyn Annotator,
    resolver: Option<&dyn UrlTextResolver>,
) -> AnnotatedDataset {
    let tweet_results: Vec<_> = dataset
        .tweets
        .par_iter()
        .map(|t| (t, annotate_tweet(t, annotator, resolver)))
        .collect();
    let reply_results: Vec<_> = dataset
        .replies
        .par_iter()
        .map(|r| (r, annotator.score_sentiment(&r.text)))
        .collect();

    let mut report = AnnotationReport {
        tweets_total: dataset.tweets.len(),
        ..Default::default()
    };
    let mut tweets = Vec::with_capacity(tweet_results.len());
    for (tweet, result) in tweet_results {
        let annotated = match result {
            Ok(a) => a,
            Err(e) => {
                report.failures.push(AnnotationFailure {
                    kind: "tweet".into(),
                    id: tweet.tweet_id.to_string(),
                    retriable: e.is_retriable(),
                    message: e.to_string(),
                });
                AnnotatedTweet {
                    tweet_id: tweet.tweet_id.clone(),
                    text_domains: Vec::new(),
                    url_domains: Vec::new(),
                    merged_domains: Vec::new(),
                    annotatable: false,
                }
            }
        };
        if annotated.annotatable {
            report.annotatable += 1;
        } else {
            report.not_annotatable += 1;
        }
        tweets.push(annotated);
    }

    let mut replies = Vec::with_capacity(reply_results.len());
    for (reply, result) in reply_results {
        match result {
            Ok(sentiment) if (-1.0..=1.0).contains(&sentiment.value()) => replies.push(AnnotatedReply {
                reply_id: reply.reply_id.clone(),
                sentiment,
            }),
            Ok(sentiment) => report.failures.push(AnnotationFailure {
                kind: "reply".into(),
                id: reply.reply_id.to_string(),
                retriable: false,
                message: format!("sentiment {} outside [-1, 1]", sentiment.value()),
            }),
            Err(e) => report.failures.push(AnnotationFailure {
                kind: "reply".into(),
                id: reply.reply_id.to_string(),
                retriable: e.is_retriable(),
                message: e.to_string(),
            }),
        }
    }
    report.replies_scored = replies.len();

    AnnotatedDataset {
        tweets,
        replies,
        report,
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::annotate::LexiconAnnotator;
    use crate::corpus::test_support::*;

    fn fixture() -> Dataset {
        let mut with_url = tweet("t3", "a", ts(2014, 8, 3), "nothing here");
        with_url.urls = vec!["https://t.co/x".into()];
        Dataset::new(
            vec![user("a", 1, 1), user("b", 1, 1)],
            vec![
                tweet("t1", "a", ts(2014, 8, 1), "football match tonight"),
                tweet("t2", "a", ts(2014, 8, 2), "zzkq wq"),
                with_url,
                tweet("t4", "b", ts(2014, 8, 4), "new python compiler release"),
            ],
            vec![reply("r1", "t1", "b", ts(2014, 8, 2), "great game")],
            ts(2015, 1, 1),
            "",
        )
    }

    #[test]
    fn counts_annotatable_tweets() {
        let ds = fixture();
        let out = annotate_dataset(&ds, &LexiconAnnotator::builtin(), None);
        assert_eq!(out.report.tweets_total, 4);
        assert_eq!(out.report.annotatable, 2);
        assert_eq!(out.report.not_annotatable, 2);
        assert_eq!(out.report.replies_scored, 1);
        let t1 = out.tweet(&"t1".into()).unwrap();
        assert_eq!(t1.merged_domains, t1.text_domains);
        assert!(out.reply_sentiment(&"r1".into()).unwrap().value() > 0.0);
    }

    #[test]
    fn url_text_makes_tweet_annotatable() {
        let ds = fixture();
        let mut urls = BTreeMap::new();
        urls.insert("https://t.co/x".to_string(), "university lecture and exam".to_string());
        let out = annotate_dataset(&ds, &LexiconAnnotator::builtin(), Some(&urls));
        let t3 = out.tweet(&"t3".into()).unwrap();
        assert!(t3.annotatable);
        assert_eq!(t3.merged_domains[0].label, "Education");
        assert!(t3.text_domains.is_empty());
    }

    #[test]
    fn deterministic() {
        let ds = fixture();
        let a = annotate_dataset(&ds, &LexiconAnnotator::builtin(), None);
        let b = annotate_dataset(&ds, &LexiconAnnotator::builtin(), None);
        assert_eq!(a, b);
    }

    struct Flaky;

    impl Annotator for Flaky {
        fn infer_taxonomy(&self, text: &str) -> Result<Vec<DomainAnnotation>, AnnotatorError> {
            if text.contains("python") {
                Err(AnnotatorError::Unavailable("timeout".into()))
            } else {
                LexiconAnnotator::builtin().infer_taxonomy(text)
            }
        }

        fn score_sentiment(&self, _: &str) -> Result<SentimentScore, AnnotatorError> {
            Err(AnnotatorError::Rejected("quota".into()))
        }
    }

    #[test]
    fn failures_are_collected_not_fatal() {
        let out = annotate_dataset(&fixture(), &Flaky, None);
        assert_eq!(out.report.annotatable, 1);
        assert_eq!(out.report.failures.len(), 2);
        assert!(out.report.failures[0].retriable);
        assert_eq!(out.report.failures[1].kind, "reply");
        assert!(!out.report.failures[1].retriable);
        assert!(out.replies.is_empty());
    }
}
