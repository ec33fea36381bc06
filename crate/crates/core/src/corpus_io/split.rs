//! Rule-based, language-agnostic sentence splitting.
//!
//! A boundary is placed after a token ending in `.`, `!`, `?`, `。`, `！` or
//! `？` (optionally followed by closing quotes or brackets) when the next token
//! starts, after any opening quotes or brackets, with an uppercase letter or a
//! caseless letter (CJK, Arabic, Devanagari, ...). Tokens found in the
//! abbreviation stop-list never end a sentence. Splits only happen at
//! whitespace, so joining the output with single spaces gives back the
//! paragraph with whitespace runs collapsed.

use std::collections::HashSet;

use super::Paragraph;

/// Lowercased tokens that never end a sentence.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "approx.", "cf.", "dr.", "e.g.", "etc.", "fig.", "i.e.", "inc.", "jr.", "ltd.", "mr.", "mrs.",
    "ms.", "no.", "prof.", "sr.", "st.", "vs.",
];

const TERMINATORS: &[char] = &['.', '!', '?', '\u{3002}', '\u{FF01}', '\u{FF1F}'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201D}', '\u{2019}', '\u{00BB}', '\u{300D}', '\u{300F}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '\u{201C}', '\u{2018}', '\u{00AB}', '\u{300C}', '\u{300E}'];

#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let abbreviations = abbreviations.into_iter().map(|a| a.as_ref().to_lowercase()).collect();
        Self { abbreviations }
    }

    pub fn split(&self, paragraph: &Paragraph) -> Vec<String> {
        self.split_text(paragraph.text())
    }

    /// Splits raw text. Whitespace-only input yields no sentences.
    pub fn split_text(&self, text: &str) -> Vec<String> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let mut sentences = Vec::new();
        let mut current = String::new();
        for (i, token) in tokens.iter().enumerate() {
            if !current.is_empty() {
                current.push(' ');
            }
            current.push_str(token);
            if let Some(next) = tokens.get(i + 1) {
                if self.ends_sentence(token) && starts_sentence(next) {
                    sentences.push(std::mem::take(&mut current));
                }
            }
        }
        if !current.is_empty() {
            sentences.push(current);
        }
        sentences
    }

    fn ends_sentence(&self, token: &str) -> bool {
        let core = token.trim_end_matches(CLOSERS);
        if !core.ends_with(TERMINATORS) {
            return false;
        }
        let word = core.trim_start_matches(OPENERS).to_lowercase();
        !self.abbreviations.contains(&word)
    }
}

fn starts_sentence(token: &str) -> bool {
    match token.trim_start_matches(OPENERS).chars().next() {
        Some(c) => c.is_uppercase() || (c.is_alphabetic() && !c.is_lowercase()),
        None => false,
    }
}

/// Splits a paragraph with the default abbreviation list.
pub fn split_paragraph(paragraph: &Paragraph) -> Vec<String> {
    SentenceSplitter::default().split(paragraph)
}
