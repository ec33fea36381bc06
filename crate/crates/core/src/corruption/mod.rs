//! Deterministic synthetic corruption of clean sentences.
//!
//! A sentence is damaged by a short random sequence of primitive steps (token
//! drops and swaps, character drops, swaps and insertions, casing flips) and
//! paired with the original as the target. A small fraction of sentences is
//! passed through unchanged. Every random decision comes from a per-record
//! stream seeded by `hash(seed, record_index)`, so the output for a record
//! never depends on processing order, and the sampled steps are recorded in a
//! [`CorruptionPlan`] that [`apply_plan`] can replay.

mod config;
mod ops;

pub use config::{ConfigError, CorruptionConfig, OpWeights, OpsPerSentence};
pub use ops::{apply_plan, ReplayError, Step};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::SentencePair;
use ops::{apply_step, lowercased, simple_upper, token_spans};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    DropTokenSpan,
    SwapTokens,
    DropCharSpan,
    SwapChars,
    InsertChars,
    LowercaseWord,
    UppercaseFirst,
}

impl OpKind {
    pub const ALL: [OpKind; 7] = [
        OpKind::DropTokenSpan,
        OpKind::SwapTokens,
        OpKind::DropCharSpan,
        OpKind::SwapChars,
        OpKind::InsertChars,
        OpKind::LowercaseWord,
        OpKind::UppercaseFirst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::DropTokenSpan => "drop_token_span",
            OpKind::SwapTokens => "swap_tokens",
            OpKind::DropCharSpan => "drop_char_span",
            OpKind::SwapChars => "swap_chars",
            OpKind::InsertChars => "insert_chars",
            OpKind::LowercaseWord => "lowercase_word",
            OpKind::UppercaseFirst => "uppercase_first",
        }
    }
}

/// The sampled steps applied to one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionPlan {
    pub id: u64,
    pub pass_through: bool,
    pub steps: Vec<Step>,
}

/// The characters insertions may draw from, usually those of the passage a
/// sentence came from. Whitespace is never part of an alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alphabet(Vec<char>);

impl Alphabet {
    pub fn from_text(text: &str) -> Self {
        Self::from_chars(text.chars())
    }

    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let mut set: Vec<char> = chars.into_iter().filter(|c| !c.is_whitespace() && !c.is_control()).collect();
        set.sort_unstable();
        set.dedup();
        Self(set)
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn chars(&self) -> &[char] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorruptError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("sentence is empty")]
    EmptySentence,
    #[error("passage alphabet is empty")]
    EmptyAlphabet,
    #[error("sentence is {bytes} bytes, over the {cap}-byte cap")]
    TooLong { bytes: usize, cap: usize },
    #[error("sentence contains a tab or line break")]
    ControlCharacter,
}

/// Mixes the run seed and a record index into the seed of that record's
/// random stream (SplitMix64 finalizer over both words).
pub fn record_seed(seed: u64, record_index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(seed) ^ record_index)
}

/// Corrupts `sentence` into a `(source = corrupted, target = sentence)` pair.
///
/// The result is a pure function of the arguments. Inserted characters come
/// from `alphabet` only, and casing steps are only sampled on tokens whose
/// re-cased characters already occur in `alphabet` or in `sentence`.
pub fn corrupt_sentence(
    lang: &str,
    sentence: &str,
    alphabet: &Alphabet,
    config: &CorruptionConfig,
    record_index: u64,
) -> Result<(SentencePair, CorruptionPlan), CorruptError> {
    config.validate()?;
    if sentence.is_empty() {
        return Err(CorruptError::EmptySentence);
    }
    if alphabet.is_empty() {
        return Err(CorruptError::EmptyAlphabet);
    }
    if sentence.len() > config.max_sentence_bytes {
        return Err(CorruptError::TooLong { bytes: sentence.len(), cap: config.max_sentence_bytes });
    }
    if sentence.contains(['\t', '\n', '\r']) {
        return Err(CorruptError::ControlCharacter);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(record_seed(config.seed, record_index));
    let mut plan = CorruptionPlan { id: record_index, pass_through: false, steps: Vec::new() };

    if rng.random::<f64>() < config.p_uncorrupted {
        plan.pass_through = true;
        let pair = SentencePair::new(record_index, lang, sentence, Some(sentence.to_owned()));
        return Ok((pair, plan));
    }

    let n_steps = sample_step_count(&mut rng, &config.ops_per_sentence);
    let allowed = |c: char| alphabet.contains(c) || sentence.contains(c);
    let mut state: Vec<char> = sentence.chars().collect();
    for _ in 0..n_steps {
        let Some(step) = sample_step(&mut rng, &state, alphabet, config, &allowed) else {
            break;
        };
        apply_step(&mut state, &step).expect("sampled step is in range");
        plan.steps.push(step);
    }

    let source: String = state.into_iter().collect();
    Ok((SentencePair::new(record_index, lang, source, Some(sentence.to_owned())), plan))
}

fn sample_step_count(rng: &mut ChaCha8Rng, dist: &OpsPerSentence) -> usize {
    let p_more = 1.0 - 1.0 / dist.mean;
    let mut k = 1;
    while k < dist.cap && rng.random::<f64>() < p_more {
        k += 1;
    }
    k
}

fn sample_step(
    rng: &mut ChaCha8Rng,
    state: &[char],
    alphabet: &Alphabet,
    config: &CorruptionConfig,
    allowed: &dyn Fn(char) -> bool,
) -> Option<Step> {
    let spans = token_spans(state);
    let n_tok = spans.len();
    let n_chars = state.len();

    let lower_candidates: Vec<usize> = (0..n_tok)
        .filter(|&t| {
            let (a, b) = spans[t];
            lowercased(&state[a..b]).all(|c| c.is_whitespace() || allowed(c))
        })
        .collect();
    let upper_candidates: Vec<usize> = (0..n_tok)
        .filter(|&t| {
            let c = state[spans[t].0];
            allowed(simple_upper(c).unwrap_or(c))
        })
        .collect();

    let applicable = |kind: OpKind| match kind {
        OpKind::DropTokenSpan | OpKind::SwapTokens => n_tok >= 2,
        OpKind::DropCharSpan | OpKind::SwapChars => n_chars >= 2,
        OpKind::InsertChars => !alphabet.is_empty(),
        OpKind::LowercaseWord => !lower_candidates.is_empty(),
        OpKind::UppercaseFirst => !upper_candidates.is_empty(),
    };
    let weights: Vec<(OpKind, f64)> = OpKind::ALL
        .into_iter()
        .filter(|&k| applicable(k))
        .map(|k| (k, config.op_weights.get(k)))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if weights.is_empty() || total <= 0.0 {
        return None;
    }
    let mut pick = rng.random::<f64>() * total;
    let mut kind = weights[weights.len() - 1].0;
    for &(k, w) in &weights {
        if pick < w {
            kind = k;
            break;
        }
        pick -= w;
    }

    let step = match kind {
        OpKind::DropTokenSpan => {
            let len = rng.random_range(1..=config.max_token_span.min(n_tok - 1));
            let start = rng.random_range(0..=n_tok - len);
            Step::DropTokenSpan { start, len }
        }
        OpKind::SwapTokens => {
            let first = rng.random_range(0..n_tok - 1);
            Step::SwapTokens { first, second: first + 1 }
        }
        OpKind::DropCharSpan => {
            let len = rng.random_range(1..=config.max_char_span.min(n_chars - 1));
            let start = rng.random_range(0..=n_chars - len);
            Step::DropCharSpan { start, len }
        }
        OpKind::SwapChars => {
            let first = rng.random_range(0..n_chars - 1);
            Step::SwapChars { first, second: first + 1 }
        }
        OpKind::InsertChars => {
            let len = rng.random_range(1..=config.max_char_span);
            let at = rng.random_range(0..=n_chars);
            let pool = alphabet.chars();
            let chars = (0..len).map(|_| pool[rng.random_range(0..pool.len())]).collect();
            Step::InsertChars { at, chars }
        }
        OpKind::LowercaseWord => {
            let token = lower_candidates[rng.random_range(0..lower_candidates.len())];
            Step::LowercaseWord { token }
        }
        OpKind::UppercaseFirst => {
            let token = upper_candidates[rng.random_range(0..upper_candidates.len())];
            Step::UppercaseFirst { token }
        }
    };
    Some(step)
}
