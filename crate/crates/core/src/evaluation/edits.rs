use serde::Serialize;

use crate::alignment::{align_tokens, RunKind};

use super::m2::GoldEdit;

/// A system edit: replace `source[start..end]` by `correction`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SystemEdit {
    pub start: usize,
    pub end: usize,
    pub correction: Vec<String>,
}

impl SystemEdit {
    pub fn new(start: usize, end: usize, correction: &[&str]) -> Self {
        Self { start, end, correction: correction.iter().map(|s| (*s).to_owned()).collect() }
    }
}

/// Span and correction access shared by gold and system edits.
pub trait Edit {
    fn start(&self) -> usize;
    fn end(&self) -> usize;
    fn correction(&self) -> &[String];
}

impl Edit for SystemEdit {
    fn start(&self) -> usize {
        self.start
    }
    fn end(&self) -> usize {
        self.end
    }
    fn correction(&self) -> &[String] {
        &self.correction
    }
}

impl Edit for GoldEdit {
    fn start(&self) -> usize {
        self.start
    }
    fn end(&self) -> usize {
        self.end
    }
    fn correction(&self) -> &[String] {
        &self.correction
    }
}

/// Edits between a source and a hypothesis: the non-Equal runs of the
/// alignment, with adjacent runs merged into one edit.
pub fn extract_system_edits<S: AsRef<str>, H: AsRef<str>>(source: &[S], hypothesis: &[H]) -> Vec<SystemEdit> {
    let src: Vec<&str> = source.iter().map(AsRef::as_ref).collect();
    let hyp: Vec<&str> = hypothesis.iter().map(AsRef::as_ref).collect();
    let script = align_tokens(&src, &hyp);
    let mut edits: Vec<SystemEdit> = Vec::new();
    let mut open = false;
    for run in &script.runs {
        if run.kind == RunKind::Equal {
            open = false;
            continue;
        }
        let correction = hyp[run.target.clone()].iter().map(|s| (*s).to_owned());
        match edits.last_mut() {
            Some(last) if open => {
                last.end = run.source.end;
                last.correction.extend(correction);
            }
            _ => edits.push(SystemEdit { start: run.source.start, end: run.source.end, correction: correction.collect() }),
        }
        open = true;
    }
    edits
}

/// Applies sorted, non-overlapping edits to a token sequence.
pub fn apply_edits<S: AsRef<str>, E: Edit>(source: &[S], edits: &[E]) -> Vec<String> {
    let mut out = Vec::with_capacity(source.len());
    let mut pos = 0;
    for edit in edits {
        out.extend(source[pos..edit.start()].iter().map(|s| s.as_ref().to_owned()));
        out.extend(edit.correction().iter().cloned());
        pos = edit.end();
    }
    out.extend(source[pos..].iter().map(|s| s.as_ref().to_owned()));
    out
}
