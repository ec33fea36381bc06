//! Corpus processing for grammatical error correction (GEC) data engineering.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`corpus_io`]: the line-oriented TSV record format, streaming readers and
//!   writers, and a rule-based paragraph splitter.
//! - [`corruption`]: deterministic, language-agnostic sentence corruption that
//!   turns clean text into `(corrupted, original)` training pairs.
//! - [`alignment`]: token-level Levenshtein alignment and corpus statistics
//!   (length ratio, WER split into substitutions, deletions and insertions).
//! - [`cleaning`]: relabeling and score-and-filter cleaning of noisy parallel
//!   corpora, with built-in scorers and a batched HTTP client.
//! - [`evaluation`]: M2 parsing, MaxMatch edit scoring with F0.5, output
//!   retokenization and a coarse edit-type breakdown.

pub mod alignment;
pub mod cleaning;
pub mod corpus_io;
pub mod corruption;
pub mod evaluation;

pub use alignment::{align_tokens, aggregate, pair_counts, CorpusStats, EditScript, PairCounts};
pub use corpus_io::{Paragraph, SentencePair};
pub use corruption::{apply_plan, corrupt_sentence, CorruptionConfig, CorruptionPlan};
pub use evaluation::{evaluate_corpus, EvalReport, GoldAnnotation, SystemEdit};

/// Version string shared by the CLI manifest and any bindings.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Splits text into whitespace-delimited tokens.
///
/// Every module that talks about "tokens" without a tokenizer uses this
/// definition: maximal runs of non-whitespace characters.
pub fn whitespace_tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}
