use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};

/// Stand-in for a zero n-gram match count in BLEU.
pub const BLEU_EPSILON: f64 = 1e-9;

/// A generated poem and its human-written references, as character lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoemPair {
    candidate: Vec<char>,
    references: Vec<Vec<char>>,
}

impl PoemPair {
    pub fn new(candidate: Vec<char>, references: Vec<Vec<char>>) -> Result<Self> {
        if candidate.is_empty() {
            return Err(Error::invalid("candidate poem is empty"));
        }
        if references.is_empty() {
            return Err(Error::invalid("no reference poems"));
        }
        if references.iter().any(Vec::is_empty) {
            return Err(Error::invalid("empty reference poem"));
        }
        Ok(PoemPair { candidate, references })
    }

    pub fn from_strs(candidate: &str, references: &[&str]) -> Result<Self> {
        PoemPair::new(candidate.chars().collect(), references.iter().map(|r| r.chars().collect()).collect())
    }

    pub fn candidate(&self) -> &[char] {
        &self.candidate
    }

    pub fn references(&self) -> &[Vec<char>] {
        &self.references
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub(crate) fn counts<T: Eq + Hash + Clone>(items: impl IntoIterator<Item = T>) -> HashMap<T, usize> {
    let mut map = HashMap::new();
    for item in items {
        *map.entry(item).or_insert(0) += 1;
    }
    map
}

/// Size of the multiset intersection of two character lists.
pub(crate) fn multiset_overlap(a: &[char], b: &[char]) -> usize {
    let cb = counts(b.iter().copied());
    counts(a.iter().copied()).into_iter().map(|(c, n)| n.min(cb.get(&c).copied().unwrap_or(0))).sum()
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Bag-of-characters precision, recall and F1 against the reference that
/// gives the best F1 (first one on ties).
pub fn char_prf(pair: &PoemPair) -> Prf {
    let cand = pair.candidate();
    pair.references()
        .iter()
        .map(|reference| {
            let overlap = multiset_overlap(cand, reference) as f64;
            let precision = overlap / cand.len() as f64;
            let recall = overlap / reference.len() as f64;
            Prf { precision, recall, f1: harmonic(precision, recall) }
        })
        .fold(None::<Prf>, |best, prf| match best {
            Some(b) if b.f1 >= prf.f1 => Some(b),
            _ => Some(prf),
        })
        .expect("PoemPair has at least one reference")
}

fn ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    counts(chars.windows(n))
}

/// Character-level BLEU.
///
/// Modified n-gram precisions for `n = 1..=max_n` are clipped by the
/// largest count in any single reference; a zero clipped count (or a
/// candidate too short to have n-grams of that order) is replaced by
/// [`BLEU_EPSILON`]. The geometric mean is scaled by the brevity penalty
/// `exp(min(0, 1 - r/c))` with `r` the reference length closest to the
/// candidate length (shorter wins ties).
pub fn bleu(pair: &PoemPair, max_n: usize) -> f64 {
    let max_n = max_n.max(1);
    let cand = pair.candidate();
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let cand_grams = ngrams(cand, n);
        let total: usize = cand_grams.values().sum();
        let ref_grams: Vec<_> = pair.references().iter().map(|r| ngrams(r, n)).collect();
        let clipped: usize = cand_grams
            .iter()
            .map(|(g, &c)| {
                let max_ref = ref_grams.iter().map(|m| m.get(g).copied().unwrap_or(0)).max().unwrap_or(0);
                c.min(max_ref)
            })
            .sum();
        let precision = if total == 0 {
            BLEU_EPSILON
        } else if clipped == 0 {
            BLEU_EPSILON / total as f64
        } else {
            clipped as f64 / total as f64
        };
        log_sum += precision.ln();
    }
    let c = cand.len() as f64;
    let r = pair
        .references()
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(cand.len()), len))
        .expect("PoemPair has at least one reference") as f64;
    let brevity = (1.0 - r / c).min(0.0).exp();
    brevity * (log_sum / max_n as f64).exp()
}
