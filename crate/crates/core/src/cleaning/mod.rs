//! Relabeling and score-and-filter cleaning of noisy parallel corpora.

pub mod client;
pub mod pipeline;
pub mod scorer;

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::corpus_io::SentencePair;

pub use client::{EndpointConfig, HttpEndpoint, AUTH_ENV};
pub use pipeline::{relabel, score_pairs, BatchFailure, BatchScorer, IdentityRewriter, Lanes, Outcome, PipelineCounts, Rewriter};
pub use scorer::{CharNgramLm, NegWer, Scorer};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("score must be finite, got {0}")]
pub struct NonFiniteScore(pub f64);

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pair: SentencePair,
    score: f64,
}

impl ScoredPair {
    pub fn new(pair: SentencePair, score: f64) -> Result<Self, NonFiniteScore> {
        if score.is_finite() {
            Ok(Self { pair, score })
        } else {
            Err(NonFiniteScore(score))
        }
    }

    pub fn pair(&self) -> &SentencePair {
        &self.pair
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn into_pair(self) -> SentencePair {
        self.pair
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("keep fraction must be in (0, 1], got {0}")]
pub struct BadKeepFraction(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterConfig {
    keep_fraction: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { keep_fraction: 0.5 }
    }
}

/// Named keep fractions: `dropNN` disregards the lowest scoring NN%.
pub const PRESETS: &[(&str, f64)] = &[("drop20", 0.8), ("drop50", 0.5), ("drop70", 0.3), ("drop90", 0.1)];

impl FilterConfig {
    pub fn new(keep_fraction: f64) -> Result<Self, BadKeepFraction> {
        if keep_fraction > 0.0 && keep_fraction <= 1.0 {
            Ok(Self { keep_fraction })
        } else {
            Err(BadKeepFraction(keep_fraction))
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESETS.iter().find(|(n, _)| *n == name).map(|&(_, keep_fraction)| Self { keep_fraction })
    }

    pub fn keep_fraction(&self) -> f64 {
        self.keep_fraction
    }

    /// `⌊keep_fraction · n + 0.5⌋`.
    pub fn keep_count(&self, n: usize) -> usize {
        ((self.keep_fraction * n as f64 + 0.5).floor() as usize).min(n)
    }
}

/// Ranking order: higher score first, then lower id.
fn rank(a: &(u64, f64), b: &(u64, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Ids to keep from `(id, score)` entries, in ascending id order.
///
/// This is the whole of the filtering decision; it needs 16 bytes per record,
/// so callers can keep the records themselves on disk.
pub fn select_ids(mut scores: Vec<(u64, f64)>, config: &FilterConfig) -> Vec<u64> {
    let keep = config.keep_count(scores.len());
    if keep < scores.len() {
        scores.select_nth_unstable_by(keep, rank);
        scores.truncate(keep);
    }
    let mut ids: Vec<u64> = scores.into_iter().map(|(id, _)| id).collect();
    ids.sort_unstable();
    ids
}

/// Keeps the best-scoring fraction of `scored`, returned in id order.
pub fn filter_by_score(scored: Vec<ScoredPair>, config: &FilterConfig) -> Vec<SentencePair> {
    let keys: Vec<(u64, f64)> = scored.iter().map(|s| (s.pair.id, s.score)).collect();
    let kept = select_ids(keys, config);
    let mut pairs: Vec<SentencePair> = scored.into_iter().map(ScoredPair::into_pair).collect();
    pairs.sort_by_key(|p| p.id);
    let mut kept = kept.into_iter().peekable();
    pairs.retain(|p| {
        if kept.peek() == Some(&p.id) {
            kept.next();
            true
        } else {
            false
        }
    });
    pairs
}
