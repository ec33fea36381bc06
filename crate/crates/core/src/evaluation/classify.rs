//! Coarse edit types for per-type breakdowns.
//!
//! Precedence is PUNCT > CASE > SPELL_LIKE > shape (INS, DEL, SUB).

use serde::Serialize;

use crate::alignment::distance_table;

use super::edits::Edit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoarseType {
    Punct,
    Case,
    SpellLike,
    Ins,
    Del,
    Sub,
}

impl CoarseType {
    pub fn as_str(self) -> &'static str {
        match self {
            CoarseType::Punct => "PUNCT",
            CoarseType::Case => "CASE",
            CoarseType::SpellLike => "SPELL_LIKE",
            CoarseType::Ins => "INS",
            CoarseType::Del => "DEL",
            CoarseType::Sub => "SUB",
        }
    }
}

impl std::fmt::Display for CoarseType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

/// Maximum character edit distance of a SPELL_LIKE substitution.
pub const SPELL_MAX_DISTANCE: u32 = 2;
/// Minimum length, in characters, of both tokens of a SPELL_LIKE substitution.
pub const SPELL_MIN_LENGTH: usize = 4;

fn is_punctuation_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric() && !c.is_whitespace())
}

pub fn char_distance(a: &str, b: &str) -> u32 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    *distance_table(&a, &b).last().expect("table is non-empty")
}

pub fn classify_edit<E: Edit + ?Sized, S: AsRef<str>>(edit: &E, source_tokens: &[S]) -> CoarseType {
    let original: Vec<&str> = source_tokens[edit.start()..edit.end()].iter().map(AsRef::as_ref).collect();
    let correction: Vec<&str> = edit.correction().iter().map(String::as_str).collect();

    let changed = original.iter().chain(correction.iter());
    if !(original.is_empty() && correction.is_empty()) && changed.clone().all(|t| is_punctuation_token(t)) {
        return CoarseType::Punct;
    }
    if !original.is_empty() && !correction.is_empty() {
        let a = original.join(" ");
        let b = correction.join(" ");
        if a != b && a.to_lowercase() == b.to_lowercase() {
            return CoarseType::Case;
        }
    }
    if let ([a], [b]) = (&original[..], &correction[..]) {
        if a.chars().count().min(b.chars().count()) >= SPELL_MIN_LENGTH && char_distance(a, b) <= SPELL_MAX_DISTANCE {
            return CoarseType::SpellLike;
        }
    }
    if original.is_empty() {
        CoarseType::Ins
    } else if correction.is_empty() {
        CoarseType::Del
    } else {
        CoarseType::Sub
    }
}
