//! Primitive corruption steps and plan replay.
//!
//! Text is handled as a sequence of Unicode scalar values. Token indices refer
//! to maximal runs of non-whitespace characters in the state the step is
//! applied to; character indices refer to positions in that same state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CorruptionPlan, OpKind};

/// One recorded corruption step with its sampled parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    /// Removes tokens `[start, start + len)` and one adjacent whitespace run.
    DropTokenSpan { start: usize, len: usize },
    SwapTokens { first: usize, second: usize },
    /// Removes characters `[start, start + len)`.
    DropCharSpan { start: usize, len: usize },
    SwapChars { first: usize, second: usize },
    /// Inserts `chars` before character offset `at`.
    InsertChars { at: usize, chars: String },
    LowercaseWord { token: usize },
    UppercaseFirst { token: usize },
}

impl Step {
    pub fn kind(&self) -> OpKind {
        match self {
            Step::DropTokenSpan { .. } => OpKind::DropTokenSpan,
            Step::SwapTokens { .. } => OpKind::SwapTokens,
            Step::DropCharSpan { .. } => OpKind::DropCharSpan,
            Step::SwapChars { .. } => OpKind::SwapChars,
            Step::InsertChars { .. } => OpKind::InsertChars,
            Step::LowercaseWord { .. } => OpKind::LowercaseWord,
            Step::UppercaseFirst { .. } => OpKind::UppercaseFirst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step} ({kind}) is out of range: {reason}")]
pub struct ReplayError {
    pub step: usize,
    pub kind: &'static str,
    pub reason: String,
}

/// Character ranges of whitespace-delimited tokens.
pub(crate) fn token_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in chars.iter().enumerate() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, chars.len()));
    }
    spans
}

/// Single-character lowercase mapping; `None` when the mapping expands.
pub(crate) fn simple_lower(c: char) -> Option<char> {
    let mut it = c.to_lowercase();
    let first = it.next()?;
    it.next().is_none().then_some(first)
}

/// Single-character uppercase mapping; `None` when the mapping expands.
pub(crate) fn simple_upper(c: char) -> Option<char> {
    let mut it = c.to_uppercase();
    let first = it.next()?;
    it.next().is_none().then_some(first)
}

pub(crate) fn lowercased(token: &[char]) -> impl Iterator<Item = char> + '_ {
    token.iter().map(|&c| simple_lower(c).unwrap_or(c))
}

/// Applies one step in place.
pub(crate) fn apply_step(chars: &mut Vec<char>, step: &Step) -> Result<(), String> {
    match *step {
        Step::DropTokenSpan { start, len } => {
            let spans = token_spans(chars);
            let end = start.checked_add(len).filter(|&e| len >= 1 && e <= spans.len());
            let Some(end) = end else {
                return Err(format!("tokens [{start}, {start}+{len}) with {} tokens", spans.len()));
            };
            let from = spans[start].0;
            let to = spans[end - 1].1;
            let (from, to) = if end < spans.len() {
                (from, spans[end].0)
            } else if start > 0 {
                (spans[start - 1].1, to)
            } else {
                (from, to)
            };
            chars.drain(from..to);
        }
        Step::SwapTokens { first, second } => {
            let spans = token_spans(chars);
            if first == second || first.max(second) >= spans.len() {
                return Err(format!("tokens {first} and {second} with {} tokens", spans.len()));
            }
            let (a, b) = if first < second { (spans[first], spans[second]) } else { (spans[second], spans[first]) };
            let mut swapped: Vec<char> = Vec::with_capacity(chars.len());
            swapped.extend_from_slice(&chars[..a.0]);
            swapped.extend_from_slice(&chars[b.0..b.1]);
            swapped.extend_from_slice(&chars[a.1..b.0]);
            swapped.extend_from_slice(&chars[a.0..a.1]);
            swapped.extend_from_slice(&chars[b.1..]);
            *chars = swapped;
        }
        Step::DropCharSpan { start, len } => {
            let end = start.checked_add(len).filter(|&e| len >= 1 && e <= chars.len());
            let Some(end) = end else {
                return Err(format!("chars [{start}, {start}+{len}) with {} chars", chars.len()));
            };
            chars.drain(start..end);
        }
        Step::SwapChars { first, second } => {
            if first == second || first.max(second) >= chars.len() {
                return Err(format!("chars {first} and {second} with {} chars", chars.len()));
            }
            chars.swap(first, second);
        }
        Step::InsertChars { at, chars: ref inserted } => {
            if at > chars.len() || inserted.is_empty() {
                return Err(format!("insert of {} chars at {at} with {} chars", inserted.chars().count(), chars.len()));
            }
            chars.splice(at..at, inserted.chars());
        }
        Step::LowercaseWord { token } => {
            let spans = token_spans(chars);
            let Some(&(from, to)) = spans.get(token) else {
                return Err(format!("token {token} with {} tokens", spans.len()));
            };
            for c in &mut chars[from..to] {
                *c = simple_lower(*c).unwrap_or(*c);
            }
        }
        Step::UppercaseFirst { token } => {
            let spans = token_spans(chars);
            let Some(&(from, _)) = spans.get(token) else {
                return Err(format!("token {token} with {} tokens", spans.len()));
            };
            chars[from] = simple_upper(chars[from]).unwrap_or(chars[from]);
        }
    }
    Ok(())
}

/// Replays a recorded plan on the original sentence.
pub fn apply_plan(sentence: &str, plan: &CorruptionPlan) -> Result<String, ReplayError> {
    let mut chars: Vec<char> = sentence.chars().collect();
    for (i, step) in plan.steps.iter().enumerate() {
        apply_step(&mut chars, step).map_err(|reason| ReplayError { step: i, kind: step.kind().name(), reason })?;
    }
    Ok(chars.into_iter().collect())
}
