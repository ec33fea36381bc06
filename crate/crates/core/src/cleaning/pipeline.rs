//! Batched relabel and scoring stages.
//!
//! Records are cut into batches of `batch_size`; up to `in_flight` batches
//! are processed concurrently, and results are emitted in input order before
//! the next window is read. Every input record comes out exactly once, either
//! accepted or rejected with a reason.

use std::thread;

use super::scorer::Scorer;
use super::ScoredPair;
use crate::corpus_io::SentencePair;

/// A batch that could not be processed; every record in it is rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchFailure {
    pub reason: String,
}

impl BatchFailure {
    pub fn new(reason: impl Into<String>) -> Self {
        Self { reason: reason.into() }
    }
}

/// Produces a new target for each record of a batch, in batch order.
pub trait Rewriter: Sync {
    fn rewrite(&self, batch: &[SentencePair]) -> Result<Vec<String>, BatchFailure>;
}

/// Scores each record of a batch, in batch order.
pub trait BatchScorer: Sync {
    fn score_batch(&self, batch: &[SentencePair]) -> Result<Vec<Result<f64, String>>, BatchFailure>;
}

impl<S: Scorer> BatchScorer for S {
    fn score_batch(&self, batch: &[SentencePair]) -> Result<Vec<Result<f64, String>>, BatchFailure> {
        Ok(batch.iter().map(|p| self.score(p).map_err(|e| e.to_string())).collect())
    }
}

/// Rewrites every source to itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRewriter;

impl Rewriter for IdentityRewriter {
    fn rewrite(&self, batch: &[SentencePair]) -> Result<Vec<String>, BatchFailure> {
        Ok(batch.iter().map(|p| p.source.clone()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lanes {
    pub batch_size: usize,
    pub in_flight: usize,
}

impl Default for Lanes {
    fn default() -> Self {
        Self { batch_size: 32, in_flight: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineCounts {
    pub accepted: u64,
    pub rejected: u64,
}

/// Per-record outcome: accepted value, or the record back with a reason.
pub type Outcome<T> = Result<T, (SentencePair, String)>;

fn run_batches<I, T, F, E, X>(records: I, lanes: Lanes, call: F, mut emit: E) -> Result<PipelineCounts, X>
where
    I: IntoIterator<Item = SentencePair>,
    T: Send,
    F: Fn(&[SentencePair]) -> Vec<Result<T, String>> + Sync,
    E: FnMut(SentencePair, Result<T, String>) -> Result<(), X>,
{
    let batch_size = lanes.batch_size.max(1);
    let in_flight = lanes.in_flight.max(1);
    let mut records = records.into_iter();
    let mut counts = PipelineCounts::default();
    loop {
        let mut window: Vec<Vec<SentencePair>> = Vec::with_capacity(in_flight);
        while window.len() < in_flight {
            let batch: Vec<SentencePair> = records.by_ref().take(batch_size).collect();
            if batch.is_empty() {
                break;
            }
            window.push(batch);
        }
        if window.is_empty() {
            return Ok(counts);
        }
        let results: Vec<Vec<Result<T, String>>> = if window.len() == 1 {
            vec![call(&window[0])]
        } else {
            let call = &call;
            thread::scope(|s| {
                let handles: Vec<_> = window.iter().map(|batch| s.spawn(move || call(batch))).collect();
                handles.into_iter().map(|h| h.join().expect("batch worker panicked")).collect()
            })
        };
        for (batch, outcomes) in window.into_iter().zip(results) {
            debug_assert_eq!(batch.len(), outcomes.len());
            for (pair, outcome) in batch.into_iter().zip(outcomes) {
                if outcome.is_ok() {
                    counts.accepted += 1;
                } else {
                    counts.rejected += 1;
                }
                emit(pair, outcome)?;
            }
        }
    }
}

fn spread<T>(batch_len: usize, result: Result<Vec<Result<T, String>>, BatchFailure>) -> Vec<Result<T, String>> {
    match result {
        Ok(items) if items.len() == batch_len => items,
        Ok(items) => (0..batch_len).map(|_| Err(format!("expected {batch_len} results, got {}", items.len()))).collect(),
        Err(failure) => (0..batch_len).map(|_| Err(failure.reason.clone())).collect(),
    }
}

/// Replaces each target with the rewriter's output. Ids, order, language and
/// source are kept verbatim.
pub fn relabel<I, R, E, X>(records: I, rewriter: &R, lanes: Lanes, mut emit: E) -> Result<PipelineCounts, X>
where
    I: IntoIterator<Item = SentencePair>,
    R: Rewriter + ?Sized,
    E: FnMut(Outcome<SentencePair>) -> Result<(), X>,
{
    let call = |batch: &[SentencePair]| -> Vec<Result<String, String>> {
        let sendable: Vec<SentencePair> = batch.iter().filter(|p| !p.source.trim().is_empty()).cloned().collect();
        let mut rewritten = if sendable.is_empty() {
            Vec::new()
        } else {
            spread(sendable.len(), rewriter.rewrite(&sendable).map(|v| v.into_iter().map(Ok).collect()))
        }
        .into_iter();
        batch
            .iter()
            .map(|p| {
                if p.source.trim().is_empty() {
                    Err("empty source".to_owned())
                } else {
                    rewritten.next().expect("one result per sent record")
                }
            })
            .collect()
    };
    run_batches(records, lanes, call, |mut pair, outcome| match outcome {
        Ok(target) => {
            pair.target = Some(target);
            emit(Ok(pair))
        }
        Err(reason) => emit(Err((pair, reason))),
    })
}

/// Attaches one finite score to each record.
pub fn score_pairs<I, S, E, X>(records: I, scorer: &S, lanes: Lanes, mut emit: E) -> Result<PipelineCounts, X>
where
    I: IntoIterator<Item = SentencePair>,
    S: BatchScorer + ?Sized,
    E: FnMut(Outcome<ScoredPair>) -> Result<(), X>,
{
    let call = |batch: &[SentencePair]| spread(batch.len(), scorer.score_batch(batch));
    run_batches(records, lanes, call, |pair, outcome| match outcome {
        Ok(score) if score.is_finite() => emit(Ok(ScoredPair::new(pair, score).expect("finite score"))),
        Ok(score) => emit(Err((pair, format!("non-finite score {score}")))),
        Err(reason) => emit(Err((pair, reason))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cleaning::NegWer;
    use std::convert::Infallible;

    fn corpus(n: u64) -> Vec<SentencePair> {
        (0..n)
            .map(|id| SentencePair { id, lang: "en".into(), source: format!("source {id}"), target: Some(format!("target {id}")) })
            .collect()
    }

    struct FailingBatch(u64);

    impl Rewriter for FailingBatch {
        fn rewrite(&self, batch: &[SentencePair]) -> Result<Vec<String>, BatchFailure> {
            if batch.iter().any(|p| p.id == self.0) {
                Err(BatchFailure::new("unavailable"))
            } else {
                Ok(batch.iter().map(|p| p.source.to_uppercase()).collect())
            }
        }
    }

    fn collect_relabel<R: Rewriter>(input: Vec<SentencePair>, rewriter: &R, lanes: Lanes) -> (Vec<SentencePair>, Vec<(SentencePair, String)>) {
        let (mut ok, mut bad) = (Vec::new(), Vec::new());
        relabel(input, rewriter, lanes, |o| {
            match o {
                Ok(p) => ok.push(p),
                Err(r) => bad.push(r),
            }
            Ok::<_, Infallible>(())
        })
        .unwrap();
        (ok, bad)
    }

    #[test]
    fn identity_relabel_copies_sources() {
        let input = corpus(70);
        let (ok, bad) = collect_relabel(input.clone(), &IdentityRewriter, Lanes::default());
        assert!(bad.is_empty());
        for (a, b) in input.iter().zip(&ok) {
            assert_eq!((a.id, &a.lang, &a.source), (b.id, &b.lang, &b.source));
            assert_eq!(b.target.as_deref(), Some(a.source.as_str()));
        }
    }

    #[test]
    fn failed_batch_goes_to_rejects_in_order() {
        let (ok, bad) = collect_relabel(corpus(100), &FailingBatch(40), Lanes::default());
        assert_eq!(ok.len(), 68);
        assert_eq!(bad.len(), 32);
        assert!(ok.windows(2).all(|w| w[0].id < w[1].id));
        assert!(bad.iter().all(|(p, reason)| (32..64).contains(&p.id) && reason == "unavailable"));
    }

    #[test]
    fn empty_sources_are_rejected_alone() {
        let mut input = corpus(5);
        input[2].source = " ".into();
        let (ok, bad) = collect_relabel(input, &IdentityRewriter, Lanes { batch_size: 2, in_flight: 3 });
        assert_eq!(ok.len(), 4);
        assert_eq!(bad[0].0.id, 2);
        assert_eq!(bad[0].1, "empty source");
    }

    #[test]
    fn scoring_conserves_records() {
        let mut input = corpus(10);
        input[3].target = None;
        let (mut ok, mut bad) = (Vec::new(), Vec::new());
        let counts = score_pairs(input, &NegWer, Lanes { batch_size: 3, in_flight: 2 }, |o| {
            match o {
                Ok(s) => ok.push(s),
                Err(r) => bad.push(r),
            }
            Ok::<_, Infallible>(())
        })
        .unwrap();
        assert_eq!(counts, PipelineCounts { accepted: 9, rejected: 1 });
        assert_eq!(ok.len() + bad.len(), 10);
        assert!(bad[0].1.starts_with("statistics require a target"));
        assert!((ok[0].score() + 0.5).abs() < 1e-12);
    }
}
