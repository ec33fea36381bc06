use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use super::classify::classify_edit;
use super::m2::GoldAnnotation;
use super::maxmatch::{max_match_sentence, AnnotatorMatch, MatchError, MaxMatchConfig};

/// The F-measure weight used throughout: precision counts twice as much as
/// recall.
pub const BETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, fp, fn_ }
    }

    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn plus(mut self, other: Counts) -> Counts {
        self.add(other);
        self
    }

    /// `tp / (tp + fp)`, or 1 when nothing was proposed.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    /// `tp / (tp + fn)`, or 1 when there was nothing to find.
    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn f_beta(&self, beta: f64) -> f64 {
        f_beta(self.precision(), self.recall(), beta)
    }

    pub fn scores(&self) -> Scores {
        Scores {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            precision: self.precision(),
            recall: self.recall(),
            f_beta: self.f_beta(BETA),
        }
    }
}

pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
}

/// How an annotator is chosen for each sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnnotatorPolicy {
    /// Maximise the running corpus F0.5 including the sentence, in corpus
    /// order.
    #[default]
    GreedyCumulative,
    /// Maximise the sentence's own F0.5.
    PerSentence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub policy: AnnotatorPolicy,
    pub maxmatch: MaxMatchConfig,
}

pub const FP_ATTRIBUTION: &str = "per-type false positives use the coarse type of the system edit";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub beta: f64,
    #[serde(flatten)]
    pub overall: Scores,
    pub per_type: BTreeMap<String, Scores>,
    pub fp_attribution: &'static str,
    /// Annotator chosen for each sentence, in corpus order.
    pub annotators: Vec<u32>,
}

impl EvalReport {
    pub fn precision(&self) -> f64 {
        self.overall.precision
    }

    pub fn recall(&self) -> f64 {
        self.overall.recall
    }

    pub fn f_beta(&self) -> f64 {
        self.overall.f_beta
    }

    /// `Precision : x.xxxx` / `Recall : x.xxxx` / `F_0.5 : x.xxxx`.
    pub fn summary_lines(&self) -> String {
        format!(
            "Precision : {:.4}\nRecall : {:.4}\nF_0.5 : {:.4}\n",
            self.overall.precision, self.overall.recall, self.overall.f_beta
        )
    }

    pub fn per_type_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {FP_ATTRIBUTION}");
        let _ = writeln!(out, "{:<12}{:>6}{:>6}{:>6}{:>8}{:>8}{:>8}", "type", "tp", "fp", "fn", "P", "R", "F0.5");
        for (label, s) in &self.per_type {
            let _ = writeln!(
                out,
                "{:<12}{:>6}{:>6}{:>6}{:>8.4}{:>8.4}{:>8.4}",
                label, s.tp, s.fp, s.fn_, s.precision, s.recall, s.f_beta
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sentence {sentence}: {source}")]
pub struct EvalError {
    pub sentence: usize,
    pub source: MatchError,
}

/// Ordering key: higher F, then more tp, fewer fp, fewer fn.
fn selection_key(counts: Counts) -> (f64, u64, std::cmp::Reverse<u64>, std::cmp::Reverse<u64>) {
    (counts.f_beta(BETA), counts.tp, std::cmp::Reverse(counts.fp), std::cmp::Reverse(counts.fn_))
}

fn choose(matches: &[AnnotatorMatch], base: Counts) -> &AnnotatorMatch {
    let mut best = &matches[0];
    let mut best_key = selection_key(base.plus(best.counts));
    for m in &matches[1..] {
        let key = selection_key(base.plus(m.counts));
        if key.partial_cmp(&best_key) == Some(std::cmp::Ordering::Greater) {
            best = m;
            best_key = key;
        }
    }
    best
}

/// Scores a corpus of `(source, hypothesis, gold)` triples.
pub fn evaluate_corpus<'a, I>(sentences: I, options: &EvalOptions) -> Result<EvalReport, EvalError>
where
    I: IntoIterator<Item = (&'a [String], &'a [String], &'a GoldAnnotation)>,
{
    let mut total = Counts::default();
    let mut per_type: BTreeMap<&'static str, Counts> = BTreeMap::new();
    let mut annotators = Vec::new();
    for (index, (source, hypothesis, gold)) in sentences.into_iter().enumerate() {
        let matches = max_match_sentence(source, hypothesis, gold, &options.maxmatch)
            .map_err(|source| EvalError { sentence: index, source })?;
        let base = match options.policy {
            AnnotatorPolicy::GreedyCumulative => total,
            AnnotatorPolicy::PerSentence => Counts::default(),
        };
        let chosen = choose(&matches, base);
        total.add(chosen.counts);
        annotators.push(chosen.annotator);

        for (edit, &hit) in chosen.system_edits.iter().zip(&chosen.matched) {
            let entry = per_type.entry(classify_edit(edit, source).as_str()).or_default();
            if hit {
                entry.tp += 1;
            } else {
                entry.fp += 1;
            }
        }
        for gold_edit in &chosen.missed {
            per_type.entry(classify_edit(gold_edit, source).as_str()).or_default().fn_ += 1;
        }
    }
    Ok(EvalReport {
        beta: BETA,
        overall: total.scores(),
        per_type: per_type.into_iter().map(|(k, c)| (k.to_owned(), c.scores())).collect(),
        fp_attribution: FP_ATTRIBUTION,
        annotators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::m2::GoldEdit;
    use proptest::prelude::*;

    #[test]
    fn worked_f05_example() {
        let c = Counts::new(2, 1, 2);
        assert!((c.precision() - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.recall() - 0.5).abs() < 1e-12);
        // (1.25 * 2/3 * 1/2) / (0.25 * 2/3 + 1/2)
        let expected: f64 = (1.25 * (2.0 / 3.0) * 0.5) / (0.25 * (2.0 / 3.0) + 0.5);
        assert!((c.f_beta(BETA) - 0.625).abs() < 1e-9);
        assert!((expected - 0.625).abs() < 1e-12);
    }

    #[test]
    fn degenerate_counts() {
        assert_eq!(Counts::new(0, 0, 0).f_beta(BETA), 1.0);
        assert_eq!(Counts::new(0, 3, 0).precision(), 0.0);
        assert_eq!(Counts::new(0, 0, 2).f_beta(BETA), 0.0);
        assert_eq!(Counts::new(0, 1, 1).f_beta(BETA), 0.0);
        assert_eq!(Counts::new(4, 0, 0).f_beta(BETA), 1.0);
    }

    fn tokens(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn picks_the_matching_annotator() {
        let src = tokens("a dog runs");
        let hyp = tokens("the dog runs");
        let mut gold = GoldAnnotation::new(&src);
        gold.add_edit(0, GoldEdit::new(2, 3, "VERB", &["ran"]));
        gold.add_edit(1, GoldEdit::new(0, 1, "DET", &["the"]));
        let report = evaluate_corpus([(&src[..], &hyp[..], &gold)], &EvalOptions::default()).unwrap();
        assert_eq!(report.annotators, vec![1]);
        assert_eq!((report.overall.tp, report.overall.fp, report.overall.fn_), (1, 0, 0));
        assert_eq!(report.summary_lines(), "Precision : 1.0000\nRecall : 1.0000\nF_0.5 : 1.0000\n");
    }

    #[test]
    fn greedy_uses_running_totals() {
        // sentence 1 fixes the totals at (1, 1, 0); for sentence 2 annotator 0
        // gives (0, 0, 1) and annotator 1 gives (0, 1, 0)
        let s1 = tokens("a b");
        let h1 = tokens("x y");
        let mut g1 = GoldAnnotation::new(&s1);
        g1.add_edit(0, GoldEdit::new(0, 1, "X", &["x"]));
        let s2 = tokens("c d");
        let h2 = tokens("c z");
        let mut g2 = GoldAnnotation::new(&s2);
        g2.add_edit(0, GoldEdit::new(0, 1, "X", &["w"]));
        g2.add_edit(0, GoldEdit::new(1, 2, "X", &["z"]));
        g2.add_edit(1, GoldEdit::new(1, 2, "X", &["q"]));
        let data = [(&s1[..], &h1[..], &g1), (&s2[..], &h2[..], &g2)];
        let greedy = evaluate_corpus(data, &EvalOptions::default()).unwrap();
        assert_eq!(greedy.annotators, vec![0, 0]);
        assert_eq!((greedy.overall.tp, greedy.overall.fp, greedy.overall.fn_), (2, 1, 1));
    }

    #[test]
    fn per_type_breakdown() {
        let src = tokens("He go to Paris");
        let hyp = tokens("He goes to paris .");
        let mut gold = GoldAnnotation::new(&src);
        gold.add_edit(0, GoldEdit::new(1, 2, "VERB", &["goes"]));
        gold.add_edit(0, GoldEdit::new(4, 4, "PUNCT", &["."]));
        let report = evaluate_corpus([(&src[..], &hyp[..], &gold)], &EvalOptions::default()).unwrap();
        assert_eq!(report.per_type["SUB"].tp, 1);
        assert_eq!(report.per_type["PUNCT"].tp, 1);
        assert_eq!(report.per_type["CASE"].fp, 1);
        assert!(report.per_type_table().starts_with("# per-type false positives"));
        let json = report.to_json();
        assert!(json.contains(r#""tp":2,"fp":1,"fn":0"#), "{json}");
    }

    proptest! {
        #[test]
        fn f_beta_identities(tp in 0u64..20, fp in 0u64..20, fn_ in 0u64..20) {
            let c = Counts::new(tp, fp, fn_);
            let f = c.f_beta(BETA);
            prop_assert!((0.0..=1.0).contains(&f));
            if tp + fp + fn_ > 0 {
                prop_assert_eq!(f == 1.0, fp == 0 && fn_ == 0 && tp > 0);
            }
            prop_assert!(Counts::new(tp + 1, fp, fn_).f_beta(BETA) >= f);
            // precision weighs more: one extra fp hurts more than one extra fn
            if tp > 0 {
                prop_assert!(Counts::new(tp, fp + 1, fn_).f_beta(BETA) <= Counts::new(tp, fp, fn_ + 1).f_beta(BETA));
            }
        }
    }
}
