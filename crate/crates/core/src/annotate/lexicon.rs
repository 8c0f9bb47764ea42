//! Deterministic lexicon-based annotator.
//!
//! Taxonomy: count the tokens of a text that belong to each domain's term list. A domain's
//! score is its hit count divided by the largest hit count, so the top domain scores 1.0.
//! The top three domains are kept and flagged confident when their hit count reaches the
//! configured threshold.
//!
//! Sentiment: `(positive hits - negative hits) / token count * gain`, clamped to `[-1, 1]`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{rank, Annotator, AnnotatorError, DomainAnnotation, SentimentScore, MAX_DOMAINS};
use crate::{Error, Result};

const BUILTIN_TAXONOMY: &str = include_str!("../../data/taxonomy.txt");
const BUILTIN_SENTIMENT: &str = include_str!("../../data/sentiment.tsv");

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyLexicon {
    domains: Vec<(String, BTreeSet<String>)>,
}

impl TaxonomyLexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_TAXONOMY).expect("built-in taxonomy lexicon parses")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses `[Domain]` sections with one term per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut domains: Vec<(String, BTreeSet<String>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::Lexicon(format!("line {}: empty domain header", idx + 1)));
                }
                if domains.iter().any(|(d, _)| d == name) {
                    return Err(Error::Lexicon(format!("duplicate domain `{name}`")));
                }
                domains.push((name.to_owned(), BTreeSet::new()));
                continue;
            }
            let Some((domain, terms)) = domains.last_mut() else {
                return Err(Error::Lexicon(format!(
                    "line {}: term `{line}` appears before any [domain] header",
                    idx + 1
                )));
            };
            let term = line.to_lowercase();
            if !terms.insert(term) {
                return Err(Error::Lexicon(format!("duplicate term `{line}` in `{domain}`")));
            }
        }
        if domains.is_empty() {
            return Err(Error::Lexicon("taxonomy lexicon defines no domains".into()));
        }
        if let Some((d, _)) = domains.iter().find(|(_, terms)| terms.is_empty()) {
            return Err(Error::Lexicon(format!("domain `{d}` has no terms")));
        }
        Ok(TaxonomyLexicon { domains })
    }

    pub fn domains(&self) -> impl Iterator<Item = &str> {
        self.domains.iter().map(|(d, _)| d.as_str())
    }

    pub fn terms(&self, domain: &str) -> Option<&BTreeSet<String>> {
        self.domains.iter().find(|(d, _)| d == domain).map(|(_, t)| t)
    }

    fn hits(&self, tokens: &[String]) -> Vec<(usize, &str)> {
        self.domains
            .iter()
            .map(|(d, terms)| (tokens.iter().filter(|t| terms.contains(*t)).count(), d.as_str()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentLexicon {
    polarity: BTreeMap<String, i8>,
}

impl SentimentLexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_SENTIMENT).expect("built-in sentiment lexicon parses")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses `term<TAB>+1` / `term<TAB>-1` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut polarity = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (term, pol) = line
                .split_once('\t')
                .ok_or_else(|| Error::Lexicon(format!("line {}: expected term<TAB>polarity", idx + 1)))?;
            let term = term.trim().to_lowercase();
            if term.is_empty() {
                return Err(Error::Lexicon(format!("line {}: empty term", idx + 1)));
            }
            let value: i8 = match pol.trim() {
                "+1" | "1" => 1,
                "-1" => -1,
                other => {
                    return Err(Error::Lexicon(format!(
                        "line {}: polarity must be +1 or -1, got `{other}`",
                        idx + 1
                    )))
                }
            };
            if polarity.insert(term.clone(), value).is_some() {
                return Err(Error::Lexicon(format!("duplicate sentiment term `{term}`")));
            }
        }
        if polarity.is_empty() {
            return Err(Error::Lexicon("sentiment lexicon is empty".into()));
        }
        Ok(SentimentLexicon { polarity })
    }

    pub fn polarity(&self, term: &str) -> Option<i8> {
        self.polarity.get(term).copied()
    }

    pub fn terms_with_polarity(&self, sign: i8) -> impl Iterator<Item = &str> {
        self.polarity
            .iter()
            .filter(move |(_, p)| **p == sign)
            .map(|(t, _)| t.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexiconConfig {
    /// Minimum hit count for a domain annotation to be flagged confident.
    pub confident_threshold: usize,
    pub sentiment_gain: f64,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig {
            confident_threshold: 2,
            sentiment_gain: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LexiconAnnotator {
    taxonomy: TaxonomyLexicon,
    sentiment: SentimentLexicon,
    config: LexiconConfig,
}

impl LexiconAnnotator {
    pub fn new(taxonomy: TaxonomyLexicon, sentiment: SentimentLexicon, config: LexiconConfig) -> Self {
        LexiconAnnotator {
            taxonomy,
            sentiment,
            config,
        }
    }

    pub fn builtin() -> Self {
        Self::new(
            TaxonomyLexicon::builtin(),
            SentimentLexicon::builtin(),
            LexiconConfig::default(),
        )
    }

    pub fn taxonomy(&self) -> &TaxonomyLexicon {
        &self.taxonomy
    }

    pub fn sentiment(&self) -> &SentimentLexicon {
        &self.sentiment
    }

    pub fn taxonomy_of(&self, text: &str) -> Vec<DomainAnnotation> {
        let tokens: Vec<String> = tokenize(text).collect();
        let hits = self.taxonomy.hits(&tokens);
        let max = hits.iter().map(|(h, _)| *h).max().unwrap_or(0);
        if max == 0 {
            return Vec::new();
        }
        let mut out: Vec<DomainAnnotation> = hits
            .into_iter()
            .filter(|(h, _)| *h > 0)
            .map(|(h, d)| DomainAnnotation::new(d, h as f64 / max as f64, h >= self.config.confident_threshold))
            .collect();
        out.sort_by(rank);
        out.truncate(MAX_DOMAINS);
        out
    }

    pub fn sentiment_of(&self, text: &str) -> SentimentScore {
        let mut total = 0usize;
        let mut balance = 0i64;
        for token in tokenize(text) {
            total += 1;
            balance += self.sentiment.polarity(&token).unwrap_or(0) as i64;
        }
        if total == 0 {
            return SentimentScore::NEUTRAL;
        }
        SentimentScore::clamped(balance as f64 / total as f64 * self.config.sentiment_gain)
    }
}

impl Annotator for LexiconAnnotator {
    fn infer_taxonomy(&self, text: &str) -> Result<Vec<DomainAnnotation>, AnnotatorError> {
        Ok(self.taxonomy_of(text))
    }

    fn score_sentiment(&self, text: &str) -> Result<SentimentScore, AnnotatorError> {
        Ok(self.sentiment_of(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> LexiconAnnotator {
        let taxonomy = TaxonomyLexicon::parse(
            "[Sports]\nfootball\ngoal\nmatch\n[Arts]\nmovie\nmusic\n[Education]\nschool\nexam\n",
        )
        .unwrap();
        let sentiment = SentimentLexicon::parse("good\t+1\ngreat\t+1\nbad\t-1\n").unwrap();
        LexiconAnnotator::new(taxonomy, sentiment, LexiconConfig::default())
    }

    #[test]
    fn empty_text() {
        let a = small();
        assert!(a.taxonomy_of("").is_empty());
        assert_eq!(a.sentiment_of("").value(), 0.0);
    }

    #[test]
    fn single_domain_scores_one() {
        let a = LexiconAnnotator::new(
            TaxonomyLexicon::parse("[Only]\nfoo\n").unwrap(),
            SentimentLexicon::builtin(),
            LexiconConfig::default(),
        );
        let out = a.taxonomy_of("some foo text");
        assert_eq!(out, vec![DomainAnnotation::new("Only", 1.0, false)]);
    }

    #[test]
    fn hit_ratio_scores() {
        // sports=4, arts=2, education=2
        let out = small().taxonomy_of("football goal match goal movie music school exam");
        let got: Vec<_> = out.iter().map(|a| (a.label.as_str(), a.score, a.confident)).collect();
        assert_eq!(
            got,
            vec![("Sports", 1.0, true), ("Arts", 0.5, true), ("Education", 0.5, true)]
        );
    }

    #[test]
    fn equal_hits_give_equal_scores() {
        let out = small().taxonomy_of("football movie");
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].score, out[1].score);
        assert!(!out[0].confident);
    }

    #[test]
    fn dense_technology_text() {
        let a = LexiconAnnotator::builtin();
        // three technology hits: python, code, github
        let out = a.taxonomy_of("Shipping Python code to GitHub today");
        assert_eq!(out[0].label, "Technology and Computing");
        assert_eq!(out[0].score, 1.0);
        assert!(out[0].confident);
    }

    #[test]
    fn nonsense_has_no_domain() {
        assert!(small().taxonomy_of("qwx zzv lorem").is_empty());
    }

    #[test]
    fn sentiment_rules() {
        let a = small();
        // 2 positive of 2 tokens, gain 2 -> clamp(2.0) = 1
        assert_eq!(a.sentiment_of("good great").value(), 1.0);
        // 1 positive of 4 tokens -> 0.25 * 2
        assert_eq!(a.sentiment_of("good thing for us").value(), 0.5);
        assert_eq!(a.sentiment_of("good bad").value(), 0.0);
        assert!(a.sentiment_of("bad bad words here").value() < 0.0);
    }

    #[test]
    fn lexicon_errors() {
        assert!(TaxonomyLexicon::parse("orphan\n[A]\nx\n").is_err());
        assert!(TaxonomyLexicon::parse("[A]\nx\nx\n").is_err());
        assert!(TaxonomyLexicon::parse("[A]\n").is_err());
        assert!(TaxonomyLexicon::parse("[A]\nx\n[A]\ny\n").is_err());
        assert!(SentimentLexicon::parse("good\t+1\ngood\t-1\n").is_err());
        assert!(SentimentLexicon::parse("good\t+2\n").is_err());
        assert!(SentimentLexicon::parse("good +1\n").is_err());
    }

    #[test]
    fn builtin_lexicons_load() {
        let t = TaxonomyLexicon::builtin();
        assert_eq!(t.domains().next(), Some("Technology and Computing"));
        assert!(t.domains().count() >= 8);
        let s = SentimentLexicon::builtin();
        assert!(s.terms_with_polarity(1).count() > 10);
        assert!(s.terms_with_polarity(-1).count() > 10);
    }

    proptest! {
        #[test]
        fn scores_stay_in_range(text in "\\PC{0,200}") {
            let a = LexiconAnnotator::builtin();
            let ann = a.taxonomy_of(&text);
            prop_assert!(ann.len() <= MAX_DOMAINS);
            for x in &ann {
                prop_assert!((0.0..=1.0).contains(&x.score));
            }
            let s = a.sentiment_of(&text).value();
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }
}
