//! Streaming reader and writer for the 2/3-column TSV corpus format.
//!
//! Grammar: one record per line, `lang TAB source [TAB target] LF`, UTF-8,
//! no BOM, no quoting or escaping.

use std::io::{self, BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use super::{is_valid_lang, InvalidPair, SentencePair};

/// Number of record errors kept in a [`ReadReport`].
pub const MAX_REPORTED_ERRORS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorPolicy {
    /// Skip malformed records and count them in the report.
    #[default]
    Skip,
    /// Yield the first malformed record as an error and stop.
    FailFast,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordErrorKind {
    InvalidUtf8 { byte_offset: u64 },
    WrongFieldCount { found: usize },
    LineBreakInField,
    BadLang,
    Io(String),
}

impl RecordErrorKind {
    /// Short machine-readable code used in the JSON report.
    pub fn code(&self) -> &'static str {
        match self {
            RecordErrorKind::InvalidUtf8 { .. } => "invalid_utf8",
            RecordErrorKind::WrongFieldCount { .. } => "wrong_field_count",
            RecordErrorKind::LineBreakInField => "line_break_in_field",
            RecordErrorKind::BadLang => "bad_lang",
            RecordErrorKind::Io(_) => "io",
        }
    }
}

/// A record-level read failure. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct RecordError {
    pub line: u64,
    pub kind: RecordErrorKind,
}

impl std::fmt::Display for RecordError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            RecordErrorKind::InvalidUtf8 { byte_offset } => {
                write!(f, "malformed UTF-8 at byte offset {byte_offset} (line {})", self.line)
            }
            RecordErrorKind::WrongFieldCount { found } => {
                write!(f, "wrong field count at line {} (found {found}, expected 2 or 3)", self.line)
            }
            RecordErrorKind::LineBreakInField => {
                write!(f, "carriage return inside a field at line {}", self.line)
            }
            RecordErrorKind::BadLang => write!(f, "invalid language tag at line {}", self.line),
            RecordErrorKind::Io(msg) => write!(f, "read error at line {}: {msg}", self.line),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportedError {
    pub line: u64,
    pub kind: &'static str,
}

/// Side-channel summary of a read: `{"read": n, "skipped": m, "errors": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReadReport {
    pub read: u64,
    pub skipped: u64,
    pub errors: Vec<ReportedError>,
}

impl ReadReport {
    fn record(&mut self, err: &RecordError) {
        self.skipped += 1;
        if self.errors.len() < MAX_REPORTED_ERRORS {
            self.errors.push(ReportedError { line: err.line, kind: err.kind.code() });
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Lazily parses [`SentencePair`]s from a buffered byte stream.
///
/// Ids are assigned 0, 1, 2, ... to the records that parse. Memory is bounded
/// by the longest line.
pub struct PairReader<R> {
    inner: R,
    policy: ErrorPolicy,
    buf: Vec<u8>,
    line: u64,
    offset: u64,
    next_id: u64,
    report: ReadReport,
    done: bool,
}

impl<R: BufRead> PairReader<R> {
    pub fn new(inner: R, policy: ErrorPolicy) -> Self {
        Self {
            inner,
            policy,
            buf: Vec::with_capacity(256),
            line: 0,
            offset: 0,
            next_id: 0,
            report: ReadReport::default(),
            done: false,
        }
    }

    pub fn report(&self) -> &ReadReport {
        &self.report
    }

    pub fn into_report(self) -> ReadReport {
        self.report
    }

    fn parse_line(&self, line_start: u64) -> Result<SentencePair, RecordErrorKind> {
        let mut bytes = self.buf.as_slice();
        if bytes.last() == Some(&b'\n') {
            bytes = &bytes[..bytes.len() - 1];
        }
        let text = std::str::from_utf8(bytes).map_err(|e| RecordErrorKind::InvalidUtf8 {
            byte_offset: line_start + e.valid_up_to() as u64,
        })?;
        let mut fields = text.split('\t');
        let found = text.split('\t').count();
        if !(2..=3).contains(&found) {
            return Err(RecordErrorKind::WrongFieldCount { found });
        }
        if text.contains('\r') {
            return Err(RecordErrorKind::LineBreakInField);
        }
        let lang = fields.next().unwrap_or_default();
        if !is_valid_lang(lang) {
            return Err(RecordErrorKind::BadLang);
        }
        let source = fields.next().unwrap_or_default();
        let target = fields.next().map(str::to_owned);
        Ok(SentencePair { id: self.next_id, lang: lang.to_owned(), source: source.to_owned(), target })
    }
}

impl<R: BufRead> Iterator for PairReader<R> {
    type Item = Result<SentencePair, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            let line_start = self.offset;
            let n = match self.inner.read_until(b'\n', &mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(n) => n,
                Err(e) => {
                    self.done = true;
                    let err = RecordError { line: self.line + 1, kind: RecordErrorKind::Io(e.to_string()) };
                    self.report.record(&err);
                    return Some(Err(err));
                }
            };
            self.offset += n as u64;
            self.line += 1;
            match self.parse_line(line_start) {
                Ok(pair) => {
                    self.next_id += 1;
                    self.report.read += 1;
                    return Some(Ok(pair));
                }
                Err(kind) => {
                    let err = RecordError { line: self.line, kind };
                    self.report.record(&err);
                    if self.policy == ErrorPolicy::FailFast {
                        self.done = true;
                        return Some(Err(err));
                    }
                }
            }
        }
        None
    }
}

/// Convenience constructor for [`PairReader`].
pub fn read_pairs<R: BufRead>(stream: R, policy: ErrorPolicy) -> PairReader<R> {
    PairReader::new(stream, policy)
}

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("record {id} is invalid: {reason}")]
    Invalid { id: u64, reason: InvalidPair },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Writes records in the grammar accepted by [`PairReader`].
pub struct PairWriter<W> {
    inner: W,
    written: u64,
}

impl<W: Write> PairWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner, written: 0 }
    }

    pub fn write(&mut self, pair: &SentencePair) -> Result<(), WriteError> {
        pair.validate().map_err(|reason| WriteError::Invalid { id: pair.id, reason })?;
        self.write_fields(pair, None)
    }

    /// Writes a record followed by a fourth `reason` column (rejects files).
    pub fn write_reject(&mut self, pair: &SentencePair, reason: &str) -> Result<(), WriteError> {
        pair.validate().map_err(|reason| WriteError::Invalid { id: pair.id, reason })?;
        self.write_fields(pair, Some(reason))
    }

    fn write_fields(&mut self, pair: &SentencePair, reason: Option<&str>) -> Result<(), WriteError> {
        let w = &mut self.inner;
        w.write_all(pair.lang.as_bytes())?;
        w.write_all(b"\t")?;
        w.write_all(pair.source.as_bytes())?;
        if let Some(target) = &pair.target {
            w.write_all(b"\t")?;
            w.write_all(target.as_bytes())?;
        } else if reason.is_some() {
            // keep the reason in the fourth column
            w.write_all(b"\t")?;
        }
        if let Some(reason) = reason {
            w.write_all(b"\t")?;
            let clean: String = reason
                .chars()
                .map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c })
                .collect();
            w.write_all(clean.as_bytes())?;
        }
        w.write_all(b"\n")?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// Writes every pair and returns the record count. Stops at the first
/// invalid record.
pub fn write_pairs<'a, I, W>(pairs: I, sink: W) -> Result<u64, WriteError>
where
    I: IntoIterator<Item = &'a SentencePair>,
    W: Write,
{
    let mut writer = PairWriter::new(sink);
    for pair in pairs {
        writer.write(pair)?;
    }
    writer.flush()?;
    Ok(writer.written())
}
