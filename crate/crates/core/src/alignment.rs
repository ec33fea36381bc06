//! Token-level Levenshtein alignment and corpus statistics.
//!
//! Statistics follow the usual corpus-table convention: the length ratio is
//! source tokens over target tokens, and WER with its substitution, deletion
//! and insertion parts is normalised by the source token count (switchable
//! through [`Normalization`]). Percentages are computed once over corpus
//! totals and rounded to two decimals, half to even.

use std::fmt::Write as _;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::corpus_io::SentencePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RunKind {
    Equal,
    Sub,
    Del,
    Ins,
}

/// A maximal run of one kind of alignment operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Run {
    pub kind: RunKind,
    pub source: Range<usize>,
    pub target: Range<usize>,
}

/// A minimal-cost alignment between two token sequences.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct EditScript {
    pub runs: Vec<Run>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub sub: u64,
    pub del: u64,
    pub ins: u64,
}

impl EditCounts {
    pub fn cost(&self) -> u64 {
        self.sub + self.del + self.ins
    }
}

impl EditScript {
    pub fn counts(&self) -> EditCounts {
        let mut counts = EditCounts::default();
        for run in &self.runs {
            match run.kind {
                RunKind::Equal => {}
                RunKind::Sub => counts.sub += run.source.len().max(run.target.len()) as u64,
                RunKind::Del => counts.del += run.source.len() as u64,
                RunKind::Ins => counts.ins += run.target.len() as u64,
            }
        }
        counts
    }

    pub fn cost(&self) -> u64 {
        self.counts().cost()
    }

    /// Rebuilds the target sequence from the source and the target tokens the
    /// script refers to.
    pub fn apply<T: Clone>(&self, source: &[T], target: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(target.len());
        for run in &self.runs {
            match run.kind {
                RunKind::Equal => out.extend_from_slice(&source[run.source.clone()]),
                RunKind::Sub | RunKind::Ins => out.extend_from_slice(&target[run.target.clone()]),
                RunKind::Del => {}
            }
        }
        out
    }
}

/// Row-major `(n + 1) x (m + 1)` table of prefix edit distances.
pub(crate) fn distance_table<T: PartialEq>(source: &[T], target: &[T]) -> Vec<u32> {
    let width = target.len() + 1;
    let mut table = vec![0u32; (source.len() + 1) * width];
    for (j, cell) in table.iter_mut().enumerate().take(width) {
        *cell = j as u32;
    }
    for i in 1..=source.len() {
        table[i * width] = i as u32;
        for j in 1..=target.len() {
            let diag = table[(i - 1) * width + j - 1] + u32::from(source[i - 1] != target[j - 1]);
            let up = table[(i - 1) * width + j] + 1;
            let left = table[i * width + j - 1] + 1;
            table[i * width + j] = diag.min(up).min(left);
        }
    }
    table
}

/// Per-cell maximum substitution count among minimal-cost prefix paths.
fn substitution_table<T: PartialEq>(source: &[T], target: &[T], table: &[u32]) -> Vec<u32> {
    let width = target.len() + 1;
    let mut subs = vec![0u32; table.len()];
    for i in 1..=source.len() {
        for j in 1..=target.len() {
            let here = table[i * width + j];
            let same = source[i - 1] == target[j - 1];
            let mut best = 0;
            if table[(i - 1) * width + j - 1] + u32::from(!same) == here {
                best = subs[(i - 1) * width + j - 1] + u32::from(!same);
            }
            if table[(i - 1) * width + j] + 1 == here {
                best = best.max(subs[(i - 1) * width + j]);
            }
            if table[i * width + j - 1] + 1 == here {
                best = best.max(subs[i * width + j - 1]);
            }
            subs[i * width + j] = best;
        }
    }
    subs
}

/// Aligns two token sequences with unit-cost Levenshtein distance.
///
/// Among minimal scripts the one with the most substitutions is kept, which
/// makes the Sub/Del/Ins split independent of argument order. Remaining ties
/// are broken during the backtrace from the end by preferring Equal, then
/// Sub, then Del, then Ins, so the script is reproducible.
pub fn align_tokens<T: PartialEq>(source: &[T], target: &[T]) -> EditScript {
    let width = target.len() + 1;
    let table = distance_table(source, target);
    let subs = substitution_table(source, target, &table);
    let at = |i: usize, j: usize| (table[i * width + j], subs[i * width + j]);

    let mut ops = Vec::with_capacity(source.len().max(target.len()));
    let (mut i, mut j) = (source.len(), target.len());
    while i > 0 || j > 0 {
        let (cost, sub) = at(i, j);
        if i > 0 && j > 0 {
            let same = source[i - 1] == target[j - 1];
            let (c, s) = at(i - 1, j - 1);
            if c + u32::from(!same) == cost && s + u32::from(!same) == sub {
                ops.push(if same { RunKind::Equal } else { RunKind::Sub });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && at(i - 1, j) == (cost - 1, sub) {
            ops.push(RunKind::Del);
            i -= 1;
        } else {
            ops.push(RunKind::Ins);
            j -= 1;
        }
    }
    ops.reverse();

    let mut runs: Vec<Run> = Vec::new();
    let (mut i, mut j) = (0, 0);
    for kind in ops {
        let (di, dj) = match kind {
            RunKind::Equal | RunKind::Sub => (1, 1),
            RunKind::Del => (1, 0),
            RunKind::Ins => (0, 1),
        };
        match runs.last_mut() {
            Some(run) if run.kind == kind => {
                run.source.end += di;
                run.target.end += dj;
            }
            _ => runs.push(Run { kind, source: i..i + di, target: j..j + dj }),
        }
        i += di;
        j += dj;
    }
    EditScript { runs }
}

/// Token and edit counts of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairCounts {
    pub n_src: u64,
    pub n_tgt: u64,
    pub sub: u64,
    pub del: u64,
    pub ins: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("statistics require a target (record {id})")]
    MissingTarget { id: u64 },
}

pub fn pair_counts(pair: &SentencePair) -> Result<PairCounts, StatsError> {
    let target = pair.target.as_deref().ok_or(StatsError::MissingTarget { id: pair.id })?;
    let src: Vec<&str> = pair.source.split_whitespace().collect();
    let tgt: Vec<&str> = target.split_whitespace().collect();
    let counts = align_tokens(&src, &tgt).counts();
    Ok(PairCounts {
        n_src: src.len() as u64,
        n_tgt: tgt.len() as u64,
        sub: counts.sub,
        del: counts.del,
        ins: counts.ins,
    })
}

/// Which token count WER percentages are normalised by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Source,
    Target,
}

/// Integer corpus totals; merging is associative and commutative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatsAccumulator {
    pub n_pairs: u64,
    pub counts: PairCounts,
}

impl StatsAccumulator {
    pub fn add(&mut self, counts: PairCounts) {
        self.n_pairs += 1;
        let c = &mut self.counts;
        c.n_src += counts.n_src;
        c.n_tgt += counts.n_tgt;
        c.sub += counts.sub;
        c.del += counts.del;
        c.ins += counts.ins;
    }

    pub fn add_pair(&mut self, pair: &SentencePair) -> Result<(), StatsError> {
        self.add(pair_counts(pair)?);
        Ok(())
    }

    pub fn merge(&mut self, other: &StatsAccumulator) {
        self.n_pairs += other.n_pairs;
        let mut total = self.counts;
        total.n_src += other.counts.n_src;
        total.n_tgt += other.counts.n_tgt;
        total.sub += other.counts.sub;
        total.del += other.counts.del;
        total.ins += other.counts.ins;
        self.counts = total;
    }

    pub fn finish(&self) -> CorpusStats {
        self.finish_with(Normalization::Source)
    }

    pub fn finish_with(&self, normalization: Normalization) -> CorpusStats {
        let c = self.counts;
        let denom = match normalization {
            Normalization::Source => c.n_src,
            Normalization::Target => c.n_tgt,
        };
        let lr = (self.n_pairs > 0 && c.n_tgt > 0).then(|| hundredths(c.n_src, c.n_tgt));
        let (wer, sub, del, ins) = if self.n_pairs > 0 && denom > 0 {
            let wer = hundredths(c.sub + c.del + c.ins, denom);
            let [sub, del, ins] = apportion(wer, [c.sub, c.del, c.ins], denom);
            (Some(wer), Some(sub), Some(del), Some(ins))
        } else {
            (None, None, None, None)
        };
        CorpusStats {
            n_pairs: self.n_pairs,
            n_source_tokens: c.n_src,
            n_target_tokens: c.n_tgt,
            lr: lr.map(Percent),
            wer: wer.map(Percent),
            sub: sub.map(Percent),
            del: del.map(Percent),
            ins: ins.map(Percent),
        }
    }
}

/// `100 * num / den` in hundredths of a percent, rounded half to even.
fn hundredths(num: u64, den: u64) -> u64 {
    let scaled = u128::from(num) * 10_000;
    let den = u128::from(den);
    let (q, r) = (scaled / den, scaled % den);
    let round_up = 2 * r > den || (2 * r == den && q % 2 == 1);
    (q + u128::from(round_up)) as u64
}

/// Splits a rounded total over its parts by largest remainder so the
/// reported parts add up to the reported total exactly.
fn apportion(total: u64, parts: [u64; 3], den: u64) -> [u64; 3] {
    let den = u128::from(den);
    let mut floors = [0u64; 3];
    let mut rems = [0u128; 3];
    for k in 0..3 {
        let scaled = u128::from(parts[k]) * 10_000;
        floors[k] = (scaled / den) as u64;
        rems[k] = scaled % den;
    }
    let mut missing = total.saturating_sub(floors.iter().sum());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| rems[b].cmp(&rems[a]).then(a.cmp(&b)));
    for &k in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        floors[k] += 1;
        missing -= 1;
    }
    floors
}

/// A percentage stored in hundredths, serialized as a two-decimal number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Percent(pub u64);

impl Percent {
    pub fn value(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl std::fmt::Display for Percent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = format!("{}.{:02}", self.0 / 100, self.0 % 100);
        f.pad(&s)
    }
}

impl Serialize for Percent {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

/// Corpus-level length ratio and WER decomposition, in percent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub n_pairs: u64,
    pub n_source_tokens: u64,
    pub n_target_tokens: u64,
    pub lr: Option<Percent>,
    pub wer: Option<Percent>,
    pub sub: Option<Percent>,
    pub del: Option<Percent>,
    pub ins: Option<Percent>,
}

impl CorpusStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }

    /// Plain-text table with columns LR, WER, Sub, Del, Ins.
    pub fn to_table(&self) -> String {
        let cell = |p: Option<Percent>| p.map_or_else(|| "-".to_owned(), |p| p.to_string());
        let mut out = String::new();
        let _ = writeln!(out, "{:>8} {:>8} {:>8} {:>8} {:>8}", "LR", "WER", "Sub", "Del", "Ins");
        let _ = writeln!(
            out,
            "{:>8} {:>8} {:>8} {:>8} {:>8}",
            cell(self.lr),
            cell(self.wer),
            cell(self.sub),
            cell(self.del),
            cell(self.ins)
        );
        out
    }
}

/// Sums per-pair counts over a corpus; every pair needs a target.
pub fn aggregate<'a, I>(pairs: I) -> Result<CorpusStats, StatsError>
where
    I: IntoIterator<Item = &'a SentencePair>,
{
    let mut acc = StatsAccumulator::default();
    for pair in pairs {
        acc.add_pair(pair)?;
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn pair(src: &str, tgt: &str) -> SentencePair {
        SentencePair::new(0, "en", src, Some(tgt.into()))
    }

    #[test]
    fn identity_is_one_equal_run() {
        let script = align_tokens(&["a", "b"], &["a", "b"]);
        assert_eq!(script.runs, vec![Run { kind: RunKind::Equal, source: 0..2, target: 0..2 }]);
        assert_eq!(script.cost(), 0);
    }

    #[test]
    fn single_deletion() {
        let script = align_tokens(&["a"], &[] as &[&str]);
        assert_eq!(script.runs, vec![Run { kind: RunKind::Del, source: 0..1, target: 0..0 }]);
        assert_eq!(script.cost(), 1);
        assert_eq!(align_tokens::<&str>(&[], &[]).runs, vec![]);
    }

    #[test]
    fn noisy_target_example_is_four_insertions() {
        let src = toks("It is cloudy or rainy recently .");
        let tgt = toks("It is It 's been cloudy or and rainy recently .");
        let script = align_tokens(&src, &tgt);
        assert_eq!(script.counts(), EditCounts { sub: 0, del: 0, ins: 4 });
        let ins: Vec<_> = script.runs.iter().filter(|r| r.kind == RunKind::Ins).collect();
        assert_eq!(ins[0].source, 2..2);
        assert_eq!(&tgt[ins[0].target.clone()], &["It", "'s", "been"]);
        assert_eq!(ins[1].source, 4..4);
        assert_eq!(&tgt[ins[1].target.clone()], &["and"]);
    }

    #[test]
    fn pair_counts_examples() {
        let c = pair_counts(&pair("a b c", "a b c")).unwrap();
        assert_eq!(c, PairCounts { n_src: 3, n_tgt: 3, sub: 0, del: 0, ins: 0 });
        let c = pair_counts(&pair("a b c", "a x c")).unwrap();
        assert_eq!(c, PairCounts { n_src: 3, n_tgt: 3, sub: 1, del: 0, ins: 0 });
        let c = pair_counts(&pair(
            "It is cloudy or rainy recently .",
            "It is It 's been cloudy or and rainy recently .",
        ))
        .unwrap();
        assert_eq!(c, PairCounts { n_src: 7, n_tgt: 11, sub: 0, del: 0, ins: 4 });
    }

    #[test]
    fn missing_target_is_an_error() {
        let err = pair_counts(&SentencePair::new(5, "en", "a", None)).unwrap_err();
        assert!(err.to_string().starts_with("statistics require a target"));
    }

    #[test]
    fn aggregate_two_pairs() {
        let pairs = [pair("a b c", "a b c"), pair("a b c", "a x c")];
        let stats = aggregate(&pairs).unwrap();
        assert_eq!(stats.wer, Some(Percent(1667)));
        assert_eq!(stats.sub, Some(Percent(1667)));
        assert_eq!(stats.del, Some(Percent(0)));
        assert_eq!(stats.ins, Some(Percent(0)));
        assert_eq!(stats.lr, Some(Percent(10000)));
        assert_eq!(
            stats.to_json(),
            r#"{"n_pairs":2,"n_source_tokens":6,"n_target_tokens":6,"lr":100.0,"wer":16.67,"sub":16.67,"del":0.0,"ins":0.0}"#
        );
        assert_eq!(
            stats.to_table(),
            "      LR      WER      Sub      Del      Ins\n  100.00    16.67    16.67     0.00     0.00\n"
        );
    }

    #[test]
    fn identical_corpus_has_zero_wer() {
        let pairs = vec![pair("x y", "x y"); 5];
        let stats = aggregate(&pairs).unwrap();
        assert_eq!(stats.wer, Some(Percent(0)));
        assert_eq!(stats.lr, Some(Percent(10000)));
    }

    #[test]
    fn empty_corpus_reports_null() {
        let stats = aggregate(&[]).unwrap();
        assert_eq!(stats.n_pairs, 0);
        assert_eq!(stats.lr, None);
        assert!(stats.to_json().contains(r#""lr":null,"wer":null"#));
        assert!(stats.to_table().contains("       -"));
    }

    #[test]
    fn half_even_rounding() {
        // 1/8 = 12.5% exactly; 1/800 = 0.125% -> 0.12
        assert_eq!(hundredths(1, 8), 1250);
        assert_eq!(hundredths(1, 800), 12);
        assert_eq!(hundredths(3, 800), 38);
        assert_eq!(hundredths(2, 3), 6667);
    }

    #[test]
    fn parts_add_up_to_rounded_total() {
        // each part is 1/600 = 0.1667%, the total 0.5%
        let mut acc = StatsAccumulator::default();
        acc.add(PairCounts { n_src: 600, n_tgt: 600, sub: 1, del: 1, ins: 1 });
        let stats = acc.finish();
        assert_eq!(stats.wer, Some(Percent(50)));
        let parts: u64 = [stats.sub, stats.del, stats.ins].iter().map(|p| p.unwrap().0).sum();
        assert_eq!(parts, 50);
    }

    #[test]
    fn target_normalization_switch() {
        let mut acc = StatsAccumulator::default();
        acc.add(PairCounts { n_src: 4, n_tgt: 5, sub: 0, del: 0, ins: 1 });
        assert_eq!(acc.finish().wer, Some(Percent(2500)));
        assert_eq!(acc.finish_with(Normalization::Target).wer, Some(Percent(2000)));
        assert_eq!(acc.finish().lr, Some(Percent(8000)));
    }

    fn token_list() -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..4, 0..=8)
    }

    proptest! {
        #[test]
        fn script_is_valid_and_reconstructs_target(src in token_list(), tgt in token_list()) {
            let script = align_tokens(&src, &tgt);
            let (mut i, mut j) = (0, 0);
            for run in &script.runs {
                prop_assert_eq!(run.source.start, i);
                prop_assert_eq!(run.target.start, j);
                match run.kind {
                    RunKind::Equal => prop_assert_eq!(&src[run.source.clone()], &tgt[run.target.clone()]),
                    RunKind::Sub => {
                        prop_assert_eq!(run.source.len(), run.target.len());
                        prop_assert!(!run.source.is_empty());
                    }
                    RunKind::Del => prop_assert!(run.target.is_empty() && !run.source.is_empty()),
                    RunKind::Ins => prop_assert!(run.source.is_empty() && !run.target.is_empty()),
                }
                i = run.source.end;
                j = run.target.end;
            }
            prop_assert_eq!((i, j), (src.len(), tgt.len()));
            prop_assert_eq!(script.apply(&src, &tgt), tgt.clone());
            let table = distance_table(&src, &tgt);
            prop_assert_eq!(script.cost(), u64::from(*table.last().unwrap()));
        }

        #[test]
        fn counts_are_symmetric(src in token_list(), tgt in token_list()) {
            let forward = align_tokens(&src, &tgt).counts();
            let backward = align_tokens(&tgt, &src).counts();
            prop_assert_eq!(forward.del, backward.ins);
            prop_assert_eq!(forward.ins, backward.del);
            prop_assert_eq!(forward.sub, backward.sub);
        }

        #[test]
        fn zero_wer_iff_equal(src in token_list(), tgt in token_list()) {
            prop_assert_eq!(align_tokens(&src, &tgt).cost() == 0, src == tgt);
        }

        #[test]
        fn merge_is_order_independent(parts in prop::collection::vec((0u64..50, 0u64..50, 0u64..5, 0u64..5, 0u64..5), 0..20)) {
            let mut whole = StatsAccumulator::default();
            let mut left = StatsAccumulator::default();
            let mut right = StatsAccumulator::default();
            for (k, &(n_src, n_tgt, sub, del, ins)) in parts.iter().enumerate() {
                let c = PairCounts { n_src, n_tgt, sub, del, ins };
                whole.add(c);
                if k % 2 == 0 { left.add(c) } else { right.add(c) }
            }
            right.merge(&left);
            prop_assert_eq!(right, whole);
        }
    }
}
