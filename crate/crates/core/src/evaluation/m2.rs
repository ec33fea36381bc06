//! The M2 gold annotation format.
//!
//! ```text
//! S <space-separated tokens>
//! A <start> <end>|||<type>|||<correction>|||<required>|||<comment>|||<annotator>
//! <blank line>
//! ```
//!
//! A noop annotator line is `A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||<id>`.
//! The canonical layout, reproduced byte for byte by [`write_m2`], groups
//! `A` lines by ascending annotator id, puts a noop line before that
//! annotator's edits, sorts edits by `(start, end)`, writes deletions with an
//! empty correction and ends every block with one blank line.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

const FIELD_SEP: &str = "|||";
const NONE: &str = "-NONE-";

/// One gold edit: replace `source_tokens[start..end]` by `correction`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldEdit {
    pub start: usize,
    pub end: usize,
    pub error_type: String,
    pub correction: Vec<String>,
    pub required: String,
    pub comment: String,
}

impl GoldEdit {
    pub fn new(start: usize, end: usize, error_type: &str, correction: &[&str]) -> Self {
        Self {
            start,
            end,
            error_type: error_type.to_owned(),
            correction: correction.iter().map(|s| (*s).to_owned()).collect(),
            required: "REQUIRED".to_owned(),
            comment: NONE.to_owned(),
        }
    }
}

/// The edits of one annotator for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatorEdits {
    /// An explicit noop line was present.
    pub noop: bool,
    pub edits: Vec<GoldEdit>,
}

/// A source sentence with the gold edits of every annotator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldAnnotation {
    pub source_tokens: Vec<String>,
    pub annotators: BTreeMap<u32, AnnotatorEdits>,
}

static NO_EDITS: Vec<GoldEdit> = Vec::new();

impl GoldAnnotation {
    pub fn new<S: AsRef<str>>(source_tokens: &[S]) -> Self {
        Self { source_tokens: source_tokens.iter().map(|s| s.as_ref().to_owned()).collect(), annotators: BTreeMap::new() }
    }

    /// Annotator ids to score against; a sentence without `A` lines counts
    /// as annotator 0 with no edits.
    pub fn annotator_ids(&self) -> Vec<u32> {
        if self.annotators.is_empty() {
            vec![0]
        } else {
            self.annotators.keys().copied().collect()
        }
    }

    pub fn edits(&self, annotator: u32) -> &[GoldEdit] {
        self.annotators.get(&annotator).map_or(&NO_EDITS[..], |a| &a.edits[..])
    }

    pub fn add_edit(&mut self, annotator: u32, edit: GoldEdit) {
        self.annotators.entry(annotator).or_default().edits.push(edit);
    }

    /// The source with one annotator's edits applied.
    pub fn corrected(&self, annotator: u32) -> Vec<String> {
        let mut out = Vec::with_capacity(self.source_tokens.len());
        let mut pos = 0;
        for edit in self.edits(annotator) {
            out.extend_from_slice(&self.source_tokens[pos..edit.start]);
            out.extend(edit.correction.iter().cloned());
            pos = edit.end;
        }
        out.extend_from_slice(&self.source_tokens[pos..]);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum M2ErrorKind {
    MissingSentence,
    MissingBlankLine,
    UnexpectedLine,
    FieldCount(usize),
    BadSpan,
    InvertedSpan { start: usize, end: usize },
    SpanOutOfRange { end: usize, len: usize },
    BadNoop,
    BadAnnotator,
    Overlap { annotator: u32 },
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {}", describe(.kind))]
pub struct M2Error {
    pub line: usize,
    pub kind: M2ErrorKind,
}

fn describe(kind: &M2ErrorKind) -> String {
    match kind {
        M2ErrorKind::MissingSentence => "edit line without a preceding S line".into(),
        M2ErrorKind::MissingBlankLine => "S line must follow a blank line".into(),
        M2ErrorKind::UnexpectedLine => "expected an S line, an A line or a blank line".into(),
        M2ErrorKind::FieldCount(n) => format!("edit line has {n} fields, expected 6"),
        M2ErrorKind::BadSpan => "edit span is not two integers".into(),
        M2ErrorKind::InvertedSpan { start, end } => format!("edit span start {start} is after end {end}"),
        M2ErrorKind::SpanOutOfRange { end, len } => format!("edit span end {end} is past the {len} source tokens"),
        M2ErrorKind::BadNoop => "span -1 -1 is only valid for a noop edit".into(),
        M2ErrorKind::BadAnnotator => "annotator id is not a non-negative integer".into(),
        M2ErrorKind::Overlap { annotator } => format!("edit overlaps another edit of annotator {annotator}"),
        M2ErrorKind::Io(msg) => format!("read error: {msg}"),
    }
}

struct Pending {
    annotation: GoldAnnotation,
    lines: BTreeMap<u32, Vec<usize>>,
}

impl Pending {
    fn finish(mut self) -> Result<GoldAnnotation, M2Error> {
        for (&annotator, entry) in self.annotation.annotators.iter_mut() {
            let lines = &self.lines[&annotator];
            let mut order: Vec<usize> = (0..entry.edits.len()).collect();
            order.sort_by_key(|&k| (entry.edits[k].start, entry.edits[k].end));
            for pair in order.windows(2) {
                let (a, b) = (&entry.edits[pair[0]], &entry.edits[pair[1]]);
                let same_insertion = a.start == a.end && (b.start, b.end) == (a.start, a.end);
                if b.start < a.end || same_insertion {
                    return Err(M2Error { line: lines[pair[1]], kind: M2ErrorKind::Overlap { annotator } });
                }
            }
            let mut sorted: Vec<Option<GoldEdit>> = entry.edits.drain(..).map(Some).collect();
            entry.edits = order.into_iter().map(|k| sorted[k].take().expect("index used once")).collect();
        }
        Ok(self.annotation)
    }
}

fn parse_edit(rest: &str, n_tokens: usize) -> Result<(u32, Option<GoldEdit>), M2ErrorKind> {
    let fields: Vec<&str> = rest.split(FIELD_SEP).collect();
    if fields.len() != 6 {
        return Err(M2ErrorKind::FieldCount(fields.len()));
    }
    let annotator: u32 = fields[5].trim().parse().map_err(|_| M2ErrorKind::BadAnnotator)?;
    let span: Vec<&str> = fields[0].split_whitespace().collect();
    let [start, end] = span[..] else {
        return Err(M2ErrorKind::BadSpan);
    };
    let start: i64 = start.parse().map_err(|_| M2ErrorKind::BadSpan)?;
    let end: i64 = end.parse().map_err(|_| M2ErrorKind::BadSpan)?;
    if start == -1 && end == -1 {
        return if fields[1] == "noop" { Ok((annotator, None)) } else { Err(M2ErrorKind::BadNoop) };
    }
    if start < 0 || end < 0 {
        return Err(M2ErrorKind::BadNoop);
    }
    let (start, end) = (start as usize, end as usize);
    if start > end {
        return Err(M2ErrorKind::InvertedSpan { start, end });
    }
    if end > n_tokens {
        return Err(M2ErrorKind::SpanOutOfRange { end, len: n_tokens });
    }
    let correction = match fields[2] {
        NONE => Vec::new(),
        text => text.split_whitespace().map(str::to_owned).collect(),
    };
    let edit = GoldEdit {
        start,
        end,
        error_type: fields[1].to_owned(),
        correction,
        required: fields[3].to_owned(),
        comment: fields[4].to_owned(),
    };
    Ok((annotator, Some(edit)))
}

/// Parses a whole M2 stream.
pub fn parse_m2<R: BufRead>(reader: R) -> Result<Vec<GoldAnnotation>, M2Error> {
    let mut out = Vec::new();
    let mut pending: Option<Pending> = None;
    let mut line_no = 0;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| M2Error { line: line_no, kind: M2ErrorKind::Io(e.to_string()) })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let err = |kind| M2Error { line: line_no, kind };
        if line.is_empty() {
            if let Some(p) = pending.take() {
                out.push(p.finish()?);
            }
        } else if line == "S" || line.starts_with("S ") {
            if pending.is_some() {
                return Err(err(M2ErrorKind::MissingBlankLine));
            }
            let tokens: Vec<String> = line[1..].split_whitespace().map(str::to_owned).collect();
            pending = Some(Pending {
                annotation: GoldAnnotation { source_tokens: tokens, annotators: BTreeMap::new() },
                lines: BTreeMap::new(),
            });
        } else if let Some(rest) = line.strip_prefix("A ") {
            let Some(p) = pending.as_mut() else {
                return Err(err(M2ErrorKind::MissingSentence));
            };
            let (annotator, edit) = parse_edit(rest, p.annotation.source_tokens.len()).map_err(err)?;
            let entry = p.annotation.annotators.entry(annotator).or_default();
            p.lines.entry(annotator).or_default();
            match edit {
                None => entry.noop = true,
                Some(edit) => {
                    entry.edits.push(edit);
                    p.lines.get_mut(&annotator).expect("inserted above").push(line_no);
                }
            }
        } else {
            return Err(err(M2ErrorKind::UnexpectedLine));
        }
    }
    if let Some(p) = pending.take() {
        out.push(p.finish()?);
    }
    Ok(out)
}

/// Writes annotations in the canonical layout.
pub fn write_m2<W: Write>(mut w: W, annotations: &[GoldAnnotation]) -> io::Result<()> {
    for annotation in annotations {
        writeln!(w, "S {}", annotation.source_tokens.join(" "))?;
        for (id, entry) in &annotation.annotators {
            if entry.noop {
                writeln!(w, "A -1 -1|||noop|||{NONE}|||REQUIRED|||{NONE}|||{id}")?;
            }
            for e in &entry.edits {
                writeln!(
                    w,
                    "A {} {}|||{}|||{}|||{}|||{}|||{}",
                    e.start,
                    e.end,
                    e.error_type,
                    e.correction.join(" "),
                    e.required,
                    e.comment,
                    id
                )?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<GoldAnnotation>, M2Error> {
        parse_m2(text.as_bytes())
    }

    #[test]
    fn single_edit() {
        let gold = parse("S a dog .\nA 0 1|||DET|||A|||REQUIRED|||-NONE-|||0\n\n").unwrap();
        assert_eq!(gold.len(), 1);
        assert_eq!(gold[0].source_tokens, ["a", "dog", "."]);
        assert_eq!(gold[0].annotator_ids(), vec![0]);
        assert_eq!(gold[0].edits(0), &[GoldEdit::new(0, 1, "DET", &["A"])]);
        assert_eq!(gold[0].corrected(0), ["A", "dog", "."]);
    }

    #[test]
    fn noop_only_annotator_has_no_edits() {
        let gold = parse("S fine .\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n\n").unwrap();
        assert_eq!(gold[0].annotators.len(), 1);
        assert!(gold[0].annotators[&0].noop);
        assert!(gold[0].edits(0).is_empty());
    }

    #[test]
    fn deletion_and_insertion() {
        let text = "S I like like it\nA 1 2|||R:OTHER||||||REQUIRED|||-NONE-|||0\nA 4 4|||M:PUNCT|||.|||REQUIRED|||-NONE-|||0\n\n";
        let gold = parse(text).unwrap();
        assert_eq!(gold[0].corrected(0), ["I", "like", "it", "."]);
        let mut out = Vec::new();
        write_m2(&mut out, &gold).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn none_correction_reads_as_deletion() {
        let gold = parse("S a b\nA 0 1|||U|||-NONE-|||REQUIRED|||-NONE-|||0\n").unwrap();
        assert_eq!(gold[0].corrected(0), ["b"]);
    }

    #[test]
    fn sentence_without_edits() {
        let gold = parse("S x y\n\nS z\n\n").unwrap();
        assert_eq!(gold.len(), 2);
        assert_eq!(gold[1].annotator_ids(), vec![0]);
        assert!(gold[1].edits(0).is_empty());
    }

    #[test]
    fn unsorted_edits_are_sorted() {
        let gold = parse("S a b c\nA 2 3|||X|||z|||REQUIRED|||-NONE-|||0\nA 0 1|||X|||y|||REQUIRED|||-NONE-|||0\n\n").unwrap();
        let spans: Vec<_> = gold[0].edits(0).iter().map(|e| (e.start, e.end)).collect();
        assert_eq!(spans, [(0, 1), (2, 3)]);
    }

    #[test]
    fn error_lines() {
        let cases: &[(&str, usize, M2ErrorKind)] = &[
            ("A 0 1|||X|||y|||REQUIRED|||-NONE-|||0\n", 1, M2ErrorKind::MissingSentence),
            ("S a b\nA 0 3|||X|||y|||REQUIRED|||-NONE-|||0\n", 2, M2ErrorKind::SpanOutOfRange { end: 3, len: 2 }),
            (
                "S a b c\nA 0 2|||X|||y|||REQUIRED|||-NONE-|||0\nA 1 3|||X|||z|||REQUIRED|||-NONE-|||0\n",
                3,
                M2ErrorKind::Overlap { annotator: 0 },
            ),
            ("S a\nS b\n", 2, M2ErrorKind::MissingBlankLine),
        ];
        for (text, line, kind) in cases {
            let err = parse(text).unwrap_err();
            assert_eq!((err.line, &err.kind), (*line, kind), "{text:?}");
        }
        let err = parse("S a\n\nX\n").unwrap_err();
        assert_eq!(err.to_string(), "line 3: expected an S line, an A line or a blank line");
    }

    #[test]
    fn insertions_and_edits_may_share_a_start() {
        let text = "S a b\nA 1 1|||M|||x|||REQUIRED|||-NONE-|||0\nA 1 2|||R|||y|||REQUIRED|||-NONE-|||0\n\n";
        let gold = parse(text).unwrap();
        assert_eq!(gold[0].corrected(0), ["a", "x", "y"]);
        let dup = "S a b\nA 1 1|||M|||x|||REQUIRED|||-NONE-|||0\nA 1 1|||M|||y|||REQUIRED|||-NONE-|||0\n\n";
        assert_eq!(parse(dup).unwrap_err().kind, M2ErrorKind::Overlap { annotator: 0 });
    }
}
