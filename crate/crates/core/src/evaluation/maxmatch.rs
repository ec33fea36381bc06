//! MaxMatch: choose the system edit decomposition that agrees best with gold.
//!
//! The lattice has one node per cell `(i, j)` of the Levenshtein table that
//! lies on some minimal-cost alignment of source and hypothesis, and one step
//! per alignment move on such an alignment. A decomposition walks the lattice
//! from `(0, 0)` to `(n, m)`, grouping consecutive steps into edits; an edit
//! from node `u` to node `v` rewrites `source[u.i..v.i]` as
//! `hypothesis[u.j..v.j]`. An edit must contain at least one non-Equal step,
//! at most `max_unchanged_words` Equal steps and, when `max_merge` is set, at
//! most that many non-Equal steps. Steps outside edits are Equal steps.
//! Two consecutive pure insertions at the same point cannot stay separate
//! edits, so no two edits of a decomposition share a span.
//!
//! Among all decompositions the scorer picks the one with the most edits
//! matching a gold edit exactly (span and correction), breaking ties by the
//! fewest unmatched edits.

use std::collections::HashSet;

use thiserror::Error;

use crate::alignment::distance_table;

use super::edits::SystemEdit;
use super::m2::{GoldAnnotation, GoldEdit};
use super::report::Counts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxMatchConfig {
    /// Equal tokens an edit may absorb.
    pub max_unchanged_words: usize,
    /// Cap on the non-Equal steps merged into one edit; `None` is unlimited.
    pub max_merge: Option<usize>,
}

impl Default for MaxMatchConfig {
    fn default() -> Self {
        Self { max_unchanged_words: 2, max_merge: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("gold/source mismatch")]
    SourceMismatch,
}

/// The best decomposition against one annotator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatorMatch {
    pub annotator: u32,
    pub counts: Counts,
    /// System edits of the chosen decomposition, in source order.
    pub system_edits: Vec<SystemEdit>,
    /// Parallel to `system_edits`: whether the edit matched a gold edit.
    pub matched: Vec<bool>,
    /// Gold edits no system edit matched.
    pub missed: Vec<GoldEdit>,
}

struct EditArc {
    from: usize,
    to: usize,
    edit: SystemEdit,
}

/// Alignment lattice between one source and one hypothesis.
pub struct EditLattice {
    width: usize,
    n: usize,
    /// Node ids (cell indices) on some optimal path, in row-major order.
    nodes: Vec<usize>,
    /// Equal steps as `(from, to)` cell pairs.
    equal_steps: Vec<(usize, usize)>,
    arcs: Vec<EditArc>,
}

impl EditLattice {
    #[allow(clippy::needless_range_loop)]
    pub fn build<S: AsRef<str>, H: AsRef<str>>(source: &[S], hypothesis: &[H], config: &MaxMatchConfig) -> Self {
        let src: Vec<&str> = source.iter().map(AsRef::as_ref).collect();
        let hyp: Vec<&str> = hypothesis.iter().map(AsRef::as_ref).collect();
        let (n, m) = (src.len(), hyp.len());
        let width = m + 1;
        let cells = (n + 1) * width;

        let fwd = distance_table(&src, &hyp);
        let rev_src: Vec<&str> = src.iter().rev().copied().collect();
        let rev_hyp: Vec<&str> = hyp.iter().rev().copied().collect();
        let rev = distance_table(&rev_src, &rev_hyp);
        let bwd = |i: usize, j: usize| rev[(n - i) * width + (m - j)];
        let total = fwd[cells - 1];

        // moves out of each cell that stay on an optimal path: (to, is_equal)
        let mut moves: Vec<Vec<(usize, bool)>> = vec![Vec::new(); cells];
        let mut on_path = vec![false; cells];
        for i in 0..=n {
            for j in 0..=m {
                let here = i * width + j;
                if fwd[here] + bwd(i, j) != total {
                    continue;
                }
                on_path[here] = true;
                let mut push = |ti: usize, tj: usize, cost: u32, equal: bool| {
                    if fwd[here] + cost + bwd(ti, tj) == total {
                        moves[here].push((ti * width + tj, equal));
                    }
                };
                if i < n && j < m {
                    let equal = src[i] == hyp[j];
                    push(i + 1, j + 1, u32::from(!equal), equal);
                }
                if i < n {
                    push(i + 1, j, 1, false);
                }
                if j < m {
                    push(i, j + 1, 1, false);
                }
            }
        }
        let nodes: Vec<usize> = (0..cells).filter(|&c| on_path[c]).collect();
        let mut slot = vec![usize::MAX; cells];
        for (k, &c) in nodes.iter().enumerate() {
            slot[c] = k;
        }

        let equal_steps = nodes
            .iter()
            .flat_map(|&c| moves[c].iter().filter(|(_, eq)| *eq).map(move |&(to, _)| (c, to)))
            .collect();

        // For every start node, the fewest Equal steps needed to reach each
        // later node; an arc exists where that is within budget.
        let max_cost = config.max_merge.map_or(u32::MAX, |k| k as u32);
        let unchanged = config.max_unchanged_words as u32;
        let mut arcs = Vec::new();
        let mut min_eq = vec![u32::MAX; nodes.len()];
        for (k0, &start) in nodes.iter().enumerate() {
            min_eq[k0] = 0;
            let mut touched = vec![k0];
            for k in k0..nodes.len() {
                let eq_here = min_eq[k];
                if eq_here == u32::MAX {
                    continue;
                }
                let cell = nodes[k];
                if k != k0 && fwd[cell] > fwd[start] {
                    let (i0, j0) = (start / width, start % width);
                    let (i1, j1) = (cell / width, cell % width);
                    arcs.push(EditArc {
                        from: start,
                        to: cell,
                        edit: SystemEdit {
                            start: i0,
                            end: i1,
                            correction: hyp[j0..j1].iter().map(|s| (*s).to_owned()).collect(),
                        },
                    });
                }
                for &(to, equal) in &moves[cell] {
                    let eq_next = eq_here + u32::from(equal);
                    if eq_next > unchanged || fwd[to] - fwd[start] > max_cost {
                        continue;
                    }
                    let t = slot[to];
                    if eq_next < min_eq[t] {
                        if min_eq[t] == u32::MAX {
                            touched.push(t);
                        }
                        min_eq[t] = eq_next;
                    }
                }
            }
            for t in touched {
                min_eq[t] = u32::MAX;
            }
        }

        Self { width, n, nodes, equal_steps, arcs }
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Best decomposition against one gold edit list.
    pub fn best_against(&self, gold: &[GoldEdit]) -> (Vec<SystemEdit>, Vec<bool>) {
        let gold_keys: HashSet<(usize, usize, &[String])> =
            gold.iter().map(|g| (g.start, g.end, g.correction.as_slice())).collect();

        // score = (tp, -fp); state 1 means "arrived by a pure insertion arc"
        #[derive(Clone, Copy)]
        enum Back {
            None,
            Equal(usize),
            Arc(usize, usize),
        }
        type Score = (i64, i64);
        let cells = (self.n + 1) * self.width;
        let mut best: Vec<[Option<Score>; 2]> = vec![[None, None]; cells];
        let mut back: Vec<[Back; 2]> = vec![[Back::None, Back::None]; cells];
        best[0][0] = Some((0, 0));

        let mut out_equal: Vec<Vec<usize>> = vec![Vec::new(); cells];
        for &(from, to) in &self.equal_steps {
            out_equal[from].push(to);
        }
        let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); cells];
        for (k, arc) in self.arcs.iter().enumerate() {
            out_arcs[arc.from].push(k);
        }

        let better = |new: Score, old: Option<Score>| old.is_none_or(|o| new > o);
        for &cell in &self.nodes {
            for state in 0..2 {
                let Some(score) = best[cell][state] else { continue };
                for &to in &out_equal[cell] {
                    if better(score, best[to][0]) {
                        best[to][0] = Some(score);
                        back[to][0] = Back::Equal(state);
                    }
                }
                for &k in &out_arcs[cell] {
                    let arc = &self.arcs[k];
                    let insertion = arc.edit.start == arc.edit.end;
                    if insertion && state == 1 {
                        continue;
                    }
                    let hit = gold_keys.contains(&(arc.edit.start, arc.edit.end, arc.edit.correction.as_slice()));
                    let next = if hit { (score.0 + 1, score.1) } else { (score.0, score.1 - 1) };
                    let to_state = usize::from(insertion);
                    if better(next, best[arc.to][to_state]) {
                        best[arc.to][to_state] = Some(next);
                        back[arc.to][to_state] = Back::Arc(k, state);
                    }
                }
            }
        }

        let end = cells - 1;
        let mut state = match (best[end][0], best[end][1]) {
            (Some(a), Some(b)) if b > a => 1,
            (None, Some(_)) => 1,
            _ => 0,
        };
        let mut cell = end;
        let mut edits = Vec::new();
        let mut matched = Vec::new();
        while cell != 0 || state != 0 {
            match back[cell][state] {
                Back::Equal(prev) => {
                    cell -= self.width + 1;
                    state = prev;
                }
                Back::Arc(k, prev) => {
                    let arc = &self.arcs[k];
                    edits.push(arc.edit.clone());
                    matched.push(gold_keys.contains(&(arc.edit.start, arc.edit.end, arc.edit.correction.as_slice())));
                    cell = arc.from;
                    state = prev;
                }
                Back::None => unreachable!("every lattice node is reachable from the origin"),
            }
        }
        edits.reverse();
        matched.reverse();
        (edits, matched)
    }
}

/// Scores one sentence against every annotator.
pub fn max_match_sentence<S: AsRef<str>, H: AsRef<str>>(
    source: &[S],
    hypothesis: &[H],
    gold: &GoldAnnotation,
    config: &MaxMatchConfig,
) -> Result<Vec<AnnotatorMatch>, MatchError> {
    if source.len() != gold.source_tokens.len()
        || source.iter().zip(&gold.source_tokens).any(|(a, b)| a.as_ref() != b)
    {
        return Err(MatchError::SourceMismatch);
    }
    let lattice = EditLattice::build(source, hypothesis, config);
    Ok(gold
        .annotator_ids()
        .into_iter()
        .map(|annotator| {
            let gold_edits = gold.edits(annotator);
            let (system_edits, matched) = lattice.best_against(gold_edits);
            let tp = matched.iter().filter(|&&m| m).count() as u64;
            let fp = matched.len() as u64 - tp;
            let hits: HashSet<(usize, usize, &[String])> = system_edits
                .iter()
                .zip(&matched)
                .filter(|(_, &m)| m)
                .map(|(e, _)| (e.start, e.end, e.correction.as_slice()))
                .collect();
            let missed: Vec<GoldEdit> = gold_edits
                .iter()
                .filter(|g| !hits.contains(&(g.start, g.end, g.correction.as_slice())))
                .cloned()
                .collect();
            let counts = Counts { tp, fp, fn_: gold_edits.len() as u64 - tp };
            AnnotatorMatch { annotator, counts, system_edits, matched, missed }
        })
        .collect())
}
