//! Blocking JSON client for external rewriter and scorer endpoints.
//!
//! Wire format:
//!
//! - `POST {base}/rewrite` with `{"items":[{"id","lang","source"}]}`,
//!   answered by `{"items":[{"id","target"}]}`;
//! - `POST {base}/score` with `{"items":[{"id","lang","source","target"}]}`,
//!   answered by `{"items":[{"id","score"}]}`.
//!
//! HTTP 429, 5xx and transport errors are retried with exponential backoff;
//! other statuses and malformed bodies fail the batch at once.

use std::collections::HashMap;
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::pipeline::{BatchFailure, BatchScorer, Lanes, Rewriter};
use crate::corpus_io::SentencePair;

/// Environment variable holding the bearer token.
pub const AUTH_ENV: &str = "GEC_FORGE_AUTH";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub batch_size: usize,
    pub timeout: Duration,
    pub max_retries: u32,
    /// First retry delay; later retries double it.
    pub backoff: Duration,
    pub in_flight: usize,
    /// Set for scorers that return losses, so that higher stays better.
    pub negate_scores: bool,
    #[serde(skip)]
    pub auth_token: Option<String>,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_owned(),
            batch_size: 32,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            backoff: Duration::from_secs(1),
            in_flight: 4,
            negate_scores: false,
            auth_token: None,
        }
    }

    /// Reads the auth token from [`AUTH_ENV`] if set.
    pub fn with_env_auth(mut self) -> Self {
        self.auth_token = std::env::var(AUTH_ENV).ok().filter(|t| !t.is_empty());
        self
    }

    pub fn lanes(&self) -> Lanes {
        Lanes { batch_size: self.batch_size, in_flight: self.in_flight }
    }
}

#[derive(Serialize)]
struct RequestItem<'a> {
    id: u64,
    lang: &'a str,
    source: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<&'a str>,
}

#[derive(Serialize)]
struct Request<'a> {
    items: Vec<RequestItem<'a>>,
}

#[derive(Deserialize)]
struct Response<T> {
    items: Vec<T>,
}

#[derive(Deserialize)]
struct RewriteItem {
    id: u64,
    target: String,
}

#[derive(Deserialize)]
struct ScoreItem {
    id: u64,
    score: f64,
}

enum Attempt {
    Retry(String),
    Fail(String),
}

pub struct HttpEndpoint {
    config: EndpointConfig,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    pub fn new(config: EndpointConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn attempt<T: DeserializeOwned>(&self, url: &str, body: &Request<'_>) -> Result<Vec<T>, Attempt> {
        let mut request = self.agent.post(url);
        if let Some(token) = &self.config.auth_token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request.send_json(body).map_err(|e| Attempt::Retry(format!("transport error: {e}")))?;
        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(Attempt::Fail(format!("HTTP {status}")));
        }
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| Attempt::Retry(format!("transport error: {e}")))?;
        serde_json::from_str::<Response<T>>(&text)
            .map(|r| r.items)
            .map_err(|e| Attempt::Fail(format!("malformed response: {e}")))
    }

    fn post<T: DeserializeOwned>(&self, path: &str, body: &Request<'_>) -> Result<Vec<T>, BatchFailure> {
        let url = format!("{}/{path}", self.config.base_url);
        let mut delay = self.config.backoff;
        let mut tries = 0;
        loop {
            match self.attempt(&url, body) {
                Ok(items) => return Ok(items),
                Err(Attempt::Fail(reason)) => return Err(BatchFailure::new(reason)),
                Err(Attempt::Retry(reason)) if tries >= self.config.max_retries => {
                    return Err(BatchFailure::new(format!("{reason} after {} retries", self.config.max_retries)));
                }
                Err(Attempt::Retry(_)) => {
                    thread::sleep(delay);
                    delay *= 2;
                    tries += 1;
                }
            }
        }
    }
}

/// Reorders response values to batch order, checking that ids round-trip.
fn by_batch_order<T>(batch: &[SentencePair], items: Vec<(u64, T)>) -> Result<Vec<T>, BatchFailure> {
    if items.len() != batch.len() {
        return Err(BatchFailure::new(format!(
            "malformed response: expected {} items, got {}",
            batch.len(),
            items.len()
        )));
    }
    let mut found: HashMap<u64, T> = HashMap::with_capacity(items.len());
    for (id, value) in items {
        if found.insert(id, value).is_some() {
            return Err(BatchFailure::new(format!("malformed response: duplicate id {id}")));
        }
    }
    batch
        .iter()
        .map(|p| found.remove(&p.id).ok_or_else(|| BatchFailure::new(format!("malformed response: missing id {}", p.id))))
        .collect()
}

impl Rewriter for HttpEndpoint {
    fn rewrite(&self, batch: &[SentencePair]) -> Result<Vec<String>, BatchFailure> {
        let body = Request {
            items: batch.iter().map(|p| RequestItem { id: p.id, lang: &p.lang, source: &p.source, target: None }).collect(),
        };
        let items: Vec<RewriteItem> = self.post("rewrite", &body)?;
        by_batch_order(batch, items.into_iter().map(|i| (i.id, i.target)).collect())
    }
}

impl BatchScorer for HttpEndpoint {
    fn score_batch(&self, batch: &[SentencePair]) -> Result<Vec<Result<f64, String>>, BatchFailure> {
        let mut outcomes: Vec<Option<Result<f64, String>>> = batch
            .iter()
            .map(|p| p.target.is_none().then(|| Err(format!("statistics require a target (record {})", p.id))))
            .collect();
        let sendable: Vec<SentencePair> = batch.iter().filter(|p| p.target.is_some()).cloned().collect();
        if !sendable.is_empty() {
            let body = Request {
                items: sendable
                    .iter()
                    .map(|p| RequestItem { id: p.id, lang: &p.lang, source: &p.source, target: p.target.as_deref() })
                    .collect(),
            };
            let items: Vec<ScoreItem> = self.post("score", &body)?;
            let scores = by_batch_order(&sendable, items.into_iter().map(|i| (i.id, i.score)).collect())?;
            let sign = if self.config.negate_scores { -1.0 } else { 1.0 };
            let mut scores = scores.into_iter();
            for slot in outcomes.iter_mut().filter(|o| o.is_none()) {
                *slot = Some(Ok(sign * scores.next().expect("one score per sent record")));
            }
        }
        Ok(outcomes.into_iter().map(|o| o.expect("every record has an outcome")).collect())
    }
}
