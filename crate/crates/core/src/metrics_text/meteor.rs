use std::collections::HashMap;

use super::overlap::counts;
use super::PoemPair;

/// Search budget for the exact minimum-chunk alignment. Past it the best
/// alignment found so far (never worse than the greedy seed) is kept.
const SEARCH_NODE_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeteorAlignment {
    /// Matched (candidate position, reference position) pairs, ordered by
    /// candidate position.
    pub links: Vec<(usize, usize)>,
    pub matches: usize,
    pub chunks: usize,
    /// False when the search budget ran out before optimality was proven.
    pub exact: bool,
}

pub(crate) fn count_chunks(links: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(i, j) in links {
        match prev {
            Some((pi, pj)) if i == pi + 1 && j == pj + 1 => {}
            _ => chunks += 1,
        }
        prev = Some((i, j));
    }
    chunks
}

/// Repeatedly links the longest common run of still-unlinked characters.
fn greedy_alignment(cand: &[char], reference: &[char]) -> Vec<(usize, usize)> {
    let mut cand_used = vec![false; cand.len()];
    let mut ref_used = vec![false; reference.len()];
    let mut links = Vec::new();
    loop {
        let mut best = (0usize, 0usize, 0usize);
        for i in 0..cand.len() {
            for j in 0..reference.len() {
                let mut len = 0;
                while i + len < cand.len()
                    && j + len < reference.len()
                    && !cand_used[i + len]
                    && !ref_used[j + len]
                    && cand[i + len] == reference[j + len]
                {
                    len += 1;
                }
                if len > best.2 {
                    best = (i, j, len);
                }
            }
        }
        let (i, j, len) = best;
        if len == 0 {
            break;
        }
        for k in 0..len {
            cand_used[i + k] = true;
            ref_used[j + k] = true;
            links.push((i + k, j + k));
        }
    }
    links.sort_unstable();
    links
}

struct Search<'a> {
    cand: &'a [char],
    ref_positions: HashMap<char, Vec<usize>>,
    skips_allowed: HashMap<char, usize>,
    skips_used: HashMap<char, usize>,
    ref_used: Vec<bool>,
    current: Vec<(usize, usize)>,
    best: Vec<(usize, usize)>,
    best_chunks: usize,
    nodes: usize,
}

impl Search<'_> {
    fn visit(&mut self, i: usize, chunks: usize) {
        if chunks >= self.best_chunks || self.nodes >= SEARCH_NODE_LIMIT {
            return;
        }
        self.nodes += 1;
        if i == self.cand.len() {
            self.best = self.current.clone();
            self.best_chunks = chunks;
            return;
        }
        let c = self.cand[i];
        let Some(positions) = self.ref_positions.get(&c).cloned() else {
            self.visit(i + 1, chunks);
            return;
        };
        // Extending the running chunk first finds good bounds early.
        let continuing = match self.current.last() {
            Some(&(pi, pj)) if pi + 1 == i => Some(pj + 1),
            _ => None,
        };
        let mut order: Vec<usize> = positions.into_iter().filter(|&j| !self.ref_used[j]).collect();
        order.sort_by_key(|&j| (Some(j) != continuing, j));
        for j in order {
            let extra = usize::from(Some(j) != continuing);
            self.ref_used[j] = true;
            self.current.push((i, j));
            self.visit(i + 1, chunks + extra);
            self.current.pop();
            self.ref_used[j] = false;
        }
        let used = self.skips_used.get(&c).copied().unwrap_or(0);
        if used < self.skips_allowed.get(&c).copied().unwrap_or(0) {
            self.skips_used.insert(c, used + 1);
            self.visit(i + 1, chunks);
            self.skips_used.insert(c, used);
        }
    }
}

/// Unigram alignment with the most exact matches and, among those, the
/// fewest chunks (runs contiguous in both candidate and reference).
pub fn meteor_alignment(cand: &[char], reference: &[char]) -> MeteorAlignment {
    let greedy = greedy_alignment(cand, reference);
    let cand_counts = counts(cand.iter().copied());
    let ref_counts = counts(reference.iter().copied());
    let mut ref_positions: HashMap<char, Vec<usize>> = HashMap::new();
    for (j, &c) in reference.iter().enumerate() {
        if cand_counts.contains_key(&c) {
            ref_positions.entry(c).or_default().push(j);
        }
    }
    // A candidate character may go unlinked only as often as it outnumbers
    // the reference, so every alignment explored has the maximum matches.
    let skips_allowed =
        cand_counts.iter().map(|(&c, &n)| (c, n.saturating_sub(ref_counts.get(&c).copied().unwrap_or(0)))).collect();

    let greedy_chunks = count_chunks(&greedy);
    let mut search = Search {
        cand,
        ref_positions,
        skips_allowed,
        skips_used: HashMap::new(),
        ref_used: vec![false; reference.len()],
        current: Vec::new(),
        best: greedy,
        best_chunks: greedy_chunks,
        nodes: 0,
    };
    search.visit(0, 0);
    let exact = search.nodes < SEARCH_NODE_LIMIT;
    MeteorAlignment { matches: search.best.len(), chunks: search.best_chunks, links: search.best, exact }
}

fn score(cand_len: usize, ref_len: usize, alignment: &MeteorAlignment) -> f64 {
    if alignment.matches == 0 {
        return 0.0;
    }
    let m = alignment.matches as f64;
    let precision = m / cand_len as f64;
    let recall = m / ref_len as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = 0.5 * (alignment.chunks as f64 / m).powi(3);
    f_mean * (1.0 - penalty)
}

/// Exact-match METEOR over characters (no stemming or synonym stages);
/// the best score over the references.
pub fn meteor_simplified(pair: &PoemPair) -> f64 {
    let cand = pair.candidate();
    pair.references().iter().map(|r| score(cand.len(), r.len(), &meteor_alignment(cand, r))).fold(0.0, f64::max)
}
