//! JSON-over-HTTP adapter for an external annotation service.
//!
//! Protocol:
//!
//! - `POST {endpoint}/taxonomy` with `{"text": "..."}` answers
//!   `{"taxonomy": [{"label": "...", "score": 0.9, "confident": true}, ...]}`
//! - `POST {endpoint}/sentiment` with `{"text": "..."}` answers `{"score": -0.4}`
//!
//! The bearer token is read from the environment variable named in the config.
//! Transport errors, timeouts and 5xx answers are retriable; anything else is a rejection.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use ureq::Agent;

use super::{Annotator, AnnotatorError, DomainAnnotation, SentimentScore};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalProviderConfig {
    pub endpoint: String,
    #[serde(default = "default_token_env")]
    pub token_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_token_env() -> String {
    "INFLUENCE_ANNOTATOR_TOKEN".into()
}

fn default_timeout() -> u64 {
    30
}

#[derive(Serialize)]
struct TextRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct TaxonomyResponse {
    taxonomy: Vec<DomainAnnotation>,
}

#[derive(Deserialize)]
struct SentimentResponse {
    score: f64,
}

pub struct HttpAnnotator {
    agent: Agent,
    endpoint: String,
    token: Option<String>,
}

impl HttpAnnotator {
    pub fn new(config: &ExternalProviderConfig) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpAnnotator {
            agent,
            endpoint: config.endpoint.trim_end_matches('/').to_owned(),
            token: std::env::var(&config.token_env).ok(),
        }
    }

    fn post<T: for<'de> Deserialize<'de>>(&self, route: &str, text: &str) -> Result<T, AnnotatorError> {
        let body = serde_json::to_string(&TextRequest { text }).map_err(|e| AnnotatorError::Rejected(e.to_string()))?;
        let mut request = self
            .agent
            .post(&format!("{}/{route}", self.endpoint))
            .header("Content-Type", "application/json");
        if let Some(token) = &self.token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send(body.as_str())
            .map_err(|e| AnnotatorError::Unavailable(e.to_string()))?;
        let status = response.status().as_u16();
        let payload = response
            .body_mut()
            .read_to_string()
            .map_err(|e| AnnotatorError::Unavailable(e.to_string()))?;
        match status {
            200..=299 => {
                serde_json::from_str(&payload).map_err(|e| AnnotatorError::Rejected(format!("bad response body: {e}")))
            }
            500..=599 | 429 => Err(AnnotatorError::Unavailable(format!("HTTP {status}"))),
            _ => Err(AnnotatorError::Rejected(format!("HTTP {status}: {payload}"))),
        }
    }
}

impl Annotator for HttpAnnotator {
    fn infer_taxonomy(&self, text: &str) -> Result<Vec<DomainAnnotation>, AnnotatorError> {
        if text.trim().is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.post::<TaxonomyResponse>("taxonomy", text)?.taxonomy)
    }

    fn score_sentiment(&self, text: &str) -> Result<SentimentScore, AnnotatorError> {
        if text.trim().is_empty() {
            return Ok(SentimentScore::NEUTRAL);
        }
        let score = self.post::<SentimentResponse>("sentiment", text)?.score;
        SentimentScore::new(score).ok_or_else(|| AnnotatorError::Rejected(format!("sentiment {score} outside [-1, 1]")))
    }
}
