//! Built-in offline scorers. Higher scores mean better targets.

use std::collections::HashMap;

use crate::alignment::{pair_counts, StatsError};
use crate::corpus_io::SentencePair;

pub trait Scorer: Sync {
    fn score(&self, pair: &SentencePair) -> Result<f64, StatsError>;
}

/// Negated word error rate: `-(sub + del + ins) / max(n_src, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NegWer;

impl Scorer for NegWer {
    fn score(&self, pair: &SentencePair) -> Result<f64, StatsError> {
        let c = pair_counts(pair)?;
        Ok(-((c.sub + c.del + c.ins) as f64) / c.n_src.max(1) as f64)
    }
}

const BOS: u32 = 0;
const EOS: u32 = 1;
const UNKNOWN: u32 = 2;

/// Character n-gram language model with add-one smoothing.
///
/// The score of a target is its mean per-character log-probability,
/// end-of-string included.
#[derive(Debug, Clone)]
pub struct CharNgramLm {
    order: usize,
    symbols: HashMap<char, u32>,
    ngrams: HashMap<Vec<u32>, u32>,
    contexts: HashMap<Vec<u32>, u32>,
}

impl CharNgramLm {
    pub const DEFAULT_ORDER: usize = 5;

    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "n-gram order must be at least 1");
        Self { order, symbols: HashMap::new(), ngrams: HashMap::new(), contexts: HashMap::new() }
    }

    pub fn train<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lm = Self::new(Self::DEFAULT_ORDER);
        for text in texts {
            lm.add(text.as_ref());
        }
        lm
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        let mut seq = vec![BOS; self.order - 1];
        seq.extend(text.chars().map(|c| self.symbols.get(&c).copied().unwrap_or(UNKNOWN)));
        seq.push(EOS);
        seq
    }

    pub fn add(&mut self, text: &str) {
        for c in text.chars() {
            let next = self.symbols.len() as u32 + 3;
            self.symbols.entry(c).or_insert(next);
        }
        let seq = self.encode(text);
        for window in seq.windows(self.order) {
            *self.ngrams.entry(window.to_vec()).or_default() += 1;
            *self.contexts.entry(window[..self.order - 1].to_vec()).or_default() += 1;
        }
    }

    /// Known characters plus end-of-string and one unknown-character slot.
    fn vocabulary(&self) -> f64 {
        self.symbols.len() as f64 + 2.0
    }

    pub fn mean_log_prob(&self, text: &str) -> f64 {
        let seq = self.encode(text);
        let v = self.vocabulary();
        let mut total = 0.0;
        let mut n = 0usize;
        for window in seq.windows(self.order) {
            let joint = self.ngrams.get(window).copied().unwrap_or(0) as f64;
            let context = self.contexts.get(&window[..self.order - 1]).copied().unwrap_or(0) as f64;
            total += ((joint + 1.0) / (context + v)).ln();
            n += 1;
        }
        total / n as f64
    }
}

impl Scorer for CharNgramLm {
    fn score(&self, pair: &SentencePair) -> Result<f64, StatsError> {
        let target = pair.target.as_deref().ok_or(StatsError::MissingTarget { id: pair.id })?;
        Ok(self.mean_log_prob(target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(source: &str, target: &str) -> SentencePair {
        SentencePair { id: 0, lang: "en".into(), source: source.into(), target: Some(target.into()) }
    }

    #[test]
    fn neg_wer_examples() {
        assert_eq!(NegWer.score(&pair("a b c", "a b c")).unwrap(), 0.0);
        assert!((NegWer.score(&pair("a b c", "a x c")).unwrap() + 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(NegWer.score(&pair("", "a")).unwrap(), -1.0);
        let missing = SentencePair { target: None, ..pair("a", "a") };
        assert!(NegWer.score(&missing).is_err());
    }

    #[test]
    fn lm_probabilities_are_normalized() {
        // add-one over the vocabulary: the distribution after any context sums to 1
        let lm = CharNgramLm::train(["abc", "abd", "ba"]);
        let v = lm.vocabulary() as usize;
        let ctx = lm.encode("ab")[1..5].to_vec();
        let mut sum = 0.0;
        for sym in 1..(v as u32 + 1) {
            let mut gram = ctx.clone();
            gram.push(sym);
            let joint = lm.ngrams.get(&gram).copied().unwrap_or(0) as f64;
            let context = lm.contexts.get(&ctx).copied().unwrap_or(0) as f64;
            sum += (joint + 1.0) / (context + lm.vocabulary());
        }
        assert!((sum - 1.0).abs() < 1e-12, "{sum}");
    }

    #[test]
    fn seen_text_beats_corrupted_text() {
        let lm = CharNgramLm::train(["the cat sat on the mat"; 5]);
        assert!(lm.mean_log_prob("the cat sat on the mat") > lm.mean_log_prob("the cta sat on teh mat"));
        assert!(lm.mean_log_prob("").is_finite());
    }
}
