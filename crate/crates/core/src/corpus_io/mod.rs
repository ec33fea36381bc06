//! Corpus records, the TSV stream format and paragraph splitting.

mod split;
mod tsv;

pub use split::{split_paragraph, SentenceSplitter, DEFAULT_ABBREVIATIONS};
pub use tsv::{
    read_pairs, write_pairs, ErrorPolicy, PairReader, PairWriter, ReadReport, RecordError,
    RecordErrorKind, ReportedError, WriteError, MAX_REPORTED_ERRORS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A `(source, target)` text pair: the record flowing through every stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: u64,
    pub lang: String,
    pub source: String,
    pub target: Option<String>,
}

/// Why a [`SentencePair`] cannot be serialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InvalidPair {
    #[error("language tag is empty or not lowercase [a-z0-9-]")]
    BadLang,
    #[error("{0} contains a tab")]
    Tab(Field),
    #[error("{0} contains a line break")]
    LineBreak(Field),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Lang,
    Source,
    Target,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Lang => "lang",
            Field::Source => "source",
            Field::Target => "target",
        })
    }
}

impl SentencePair {
    pub fn new(id: u64, lang: impl Into<String>, source: impl Into<String>, target: Option<String>) -> Self {
        Self { id, lang: lang.into(), source: source.into(), target }
    }

    /// Checks the record invariants required by the TSV format.
    pub fn validate(&self) -> Result<(), InvalidPair> {
        if !is_valid_lang(&self.lang) {
            return Err(InvalidPair::BadLang);
        }
        check_text(&self.source, Field::Source)?;
        if let Some(target) = &self.target {
            check_text(target, Field::Target)?;
        }
        Ok(())
    }
}

pub(crate) fn is_valid_lang(lang: &str) -> bool {
    !lang.is_empty()
        && lang
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

pub(crate) fn check_text(text: &str, field: Field) -> Result<(), InvalidPair> {
    for c in text.chars() {
        match c {
            '\t' => return Err(InvalidPair::Tab(field)),
            '\n' | '\r' => return Err(InvalidPair::LineBreak(field)),
            _ => {}
        }
    }
    Ok(())
}

/// A possibly multi-sentence block of text in one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    lang: String,
    text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("paragraph text is empty after trimming whitespace")]
pub struct EmptyParagraph;

impl Paragraph {
    pub fn new(lang: impl Into<String>, text: impl Into<String>) -> Result<Self, EmptyParagraph> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(EmptyParagraph);
        }
        Ok(Self { lang: lang.into(), text })
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}
