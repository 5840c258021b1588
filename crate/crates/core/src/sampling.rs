//! Seedable single-step decoding: temperature softmax, top-k and nucleus
//! sampling over a logit vector.
//!
//! Temperature shapes the distribution before either truncation. Ties in
//! the ranking are broken by the lower vocabulary index, and draws use
//! inverse-CDF lookup on [`Prng::next_f64`], so a given (logits, config,
//! seed) always yields the same tokens.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::rng::Prng;

pub const DEFAULT_TOP_K: usize = 12;
pub const DEFAULT_TEMPERATURE: f64 = 0.6;
pub const DEFAULT_TOP_P: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct LogitVector {
    logits: Vec<f64>,
    vocab_ids: Option<Vec<u32>>,
}

impl LogitVector {
    pub fn new(logits: Vec<f64>) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::invalid("empty logit vector"));
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite logit"));
        }
        Ok(LogitVector { logits, vocab_ids: None })
    }

    pub fn with_vocab_ids(mut self, ids: Vec<u32>) -> Result<Self> {
        if ids.len() != self.logits.len() {
            return Err(Error::Dimension(format!("{} vocab ids for {} logits", ids.len(), self.logits.len())));
        }
        self.vocab_ids = Some(ids);
        Ok(self)
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    /// Vocabulary id of position `index` (the index itself when no ids were
    /// attached).
    pub fn token_id(&self, index: usize) -> u32 {
        self.vocab_ids.as_ref().map_or(index as u32, |ids| ids[index])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    TopK,
    Nucleus,
    Greedy,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Strategy::TopK => "top_k",
            Strategy::Nucleus => "nucleus",
            Strategy::Greedy => "greedy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub strategy: Strategy,
    pub k: usize,
    pub temperature: f64,
    pub p: f64,
    pub seed: u64,
}

impl SamplingConfig {
    /// The given strategy with k = 12, temperature 0.6, p = 0.9, seed 0.
    pub fn new(strategy: Strategy) -> Self {
        SamplingConfig { strategy, k: DEFAULT_TOP_K, temperature: DEFAULT_TEMPERATURE, p: DEFAULT_TOP_P, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid(format!("temperature must be > 0, got {}", self.temperature)));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid(format!("p must be in (0, 1], got {}", self.p)));
        }
        Ok(())
    }
}

/// Candidate indices with their renormalized probabilities, in ranking
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub indices: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Support {
    /// Inverse-CDF draw: the first index whose running mass exceeds `u`.
    pub fn draw(&self, rng: &mut Prng) -> usize {
        let u = rng.next_f64();
        let mut cumulative = 0.0;
        for (&index, &p) in self.indices.iter().zip(&self.probs) {
            cumulative += p;
            if u < cumulative {
                return index;
            }
        }
        // Rounding left the total just under 1: fall back to the last
        // token with positive mass.
        self.indices.iter().zip(&self.probs).rev().find(|(_, &p)| p > 0.0).map_or(self.indices[0], |(&i, _)| i)
    }
}

/// `p_i = exp(v_i / T - m) / sum_j exp(v_j / T - m)` with `m = max(v / T)`.
pub fn softmax_temperature(v: &LogitVector, temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid(format!("temperature must be > 0, got {temperature}")));
    }
    let scaled: Vec<f64> = v.logits.iter().map(|l| l / temperature).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let total = pairwise_sum(&exps);
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Indices sorted by descending key, lower index first on ties.
fn ranked(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| match keys[b].total_cmp(&keys[a]) {
        Ordering::Equal => a.cmp(&b),
        other => other,
    });
    order
}

fn renormalized(indices: Vec<usize>, probs: &[f64]) -> Support {
    let mass: Vec<f64> = indices.iter().map(|&i| probs[i]).collect();
    let total = pairwise_sum(&mass);
    Support { probs: mass.iter().map(|p| p / total).collect(), indices }
}

/// The `k` highest logits (k clamped to the vocabulary size) with their
/// temperature-softmax mass renormalized.
pub fn top_k_support(v: &LogitVector, k: usize, temperature: f64) -> Result<Support> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let probs = softmax_temperature(v, temperature)?;
    let mut order = ranked(&v.logits);
    order.truncate(k.min(v.len()));
    Ok(renormalized(order, &probs))
}

/// Smallest probability-ranked prefix whose cumulative mass reaches `p`
/// (the crossing token included), renormalized.
pub fn nucleus_support(v: &LogitVector, p: f64, temperature: f64) -> Result<Support> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("p must be in (0, 1], got {p}")));
    }
    let probs = softmax_temperature(v, temperature)?;
    let order = ranked(&probs);
    let mut cumulative = 0.0;
    let mut cut = order.len();
    for (n, &i) in order.iter().enumerate() {
        cumulative += probs[i];
        if cumulative >= p {
            cut = n + 1;
            break;
        }
    }
    Ok(renormalized(order[..cut].to_vec(), &probs))
}

pub fn argmax(v: &LogitVector) -> usize {
    ranked(&v.logits)[0]
}

pub fn top_k_sample(v: &LogitVector, cfg: &SamplingConfig, rng: &mut Prng) -> Result<usize> {
    cfg.validate()?;
    Ok(top_k_support(v, cfg.k, cfg.temperature)?.draw(rng))
}

pub fn nucleus_sample(v: &LogitVector, cfg: &SamplingConfig, rng: &mut Prng) -> Result<usize> {
    cfg.validate()?;
    Ok(nucleus_support(v, cfg.p, cfg.temperature)?.draw(rng))
}

/// Dispatches on `cfg.strategy`. Greedy consumes no randomness.
pub fn sample(v: &LogitVector, cfg: &SamplingConfig, rng: &mut Prng) -> Result<usize> {
    match cfg.strategy {
        Strategy::TopK => top_k_sample(v, cfg, rng),
        Strategy::Nucleus => nucleus_sample(v, cfg, rng),
        Strategy::Greedy => Ok(argmax(v)),
    }
}
