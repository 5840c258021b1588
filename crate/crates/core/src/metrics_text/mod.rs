//! Poem-side metrics: per-character cross-entropy, MCE, MTE, perplexity,
//! character precision/recall/F1, BLEU and exact-match METEOR.
//!
//! Cross-entropies use natural logarithms. Corpus reductions are pairwise
//! sums over the per-poem values in input order.

mod meteor;
mod overlap;

pub use meteor::{meteor_alignment, meteor_simplified, MeteorAlignment};
pub use overlap::{bleu, char_prf, PoemPair, Prf, BLEU_EPSILON};

use std::collections::BTreeMap;

use crate::corpus_io::TokenProbSequence;
use crate::error::{Error, Result};
use crate::numeric::{mean, pairwise_sum};

/// Mean negative log-probability of the ground-truth characters of one poem.
pub fn cross_entropy_seq(seq: &TokenProbSequence) -> f64 {
    let nll: Vec<f64> = seq.logp_true.iter().map(|lp| -lp).collect();
    mean(&nll).unwrap_or(0.0)
}

/// Mean cross-entropy error: the unweighted mean over poems of
/// [`cross_entropy_seq`].
pub fn mce(corpus: &[TokenProbSequence]) -> Result<f64> {
    let per_poem: Vec<f64> = corpus.iter().map(cross_entropy_seq).collect();
    mean(&per_poem).ok_or_else(|| Error::invalid("MCE of an empty corpus"))
}

/// The K generations sampled for one painting.
#[derive(Debug, Clone, PartialEq)]
pub struct MteGroup {
    group_id: String,
    sequences: Vec<TokenProbSequence>,
}

impl MteGroup {
    pub fn new(group_id: impl Into<String>, sequences: Vec<TokenProbSequence>) -> Result<Self> {
        let group_id = group_id.into();
        if sequences.is_empty() {
            return Err(Error::invalid(format!("MTE group {group_id:?} is empty")));
        }
        if let Some(stray) = sequences.iter().find(|s| s.group_id.as_deref().is_some_and(|g| g != group_id)) {
            return Err(Error::invalid(format!(
                "sequence {:?} belongs to group {:?}, not {group_id:?}",
                stray.id,
                stray.group_id.as_deref().unwrap_or_default()
            )));
        }
        Ok(MteGroup { group_id, sequences })
    }

    pub fn group_id(&self) -> &str {
        &self.group_id
    }

    pub fn sequences(&self) -> &[TokenProbSequence] {
        &self.sequences
    }

    /// Mean per-poem cross-entropy inside the group.
    pub fn mean_cross_entropy(&self) -> f64 {
        let ce: Vec<f64> = self.sequences.iter().map(cross_entropy_seq).collect();
        mean(&ce).unwrap_or(0.0)
    }
}

/// Groups sequences by `group_id`, ordered by group id. Every sequence must
/// carry a group id.
pub fn group_sequences(corpus: &[TokenProbSequence]) -> Result<Vec<MteGroup>> {
    let mut by_group: BTreeMap<&str, Vec<TokenProbSequence>> = BTreeMap::new();
    for seq in corpus {
        let g = seq.group_id.as_deref().ok_or_else(|| Error::invalid(format!("id {:?} has no group_id", seq.id)))?;
        by_group.entry(g).or_default().push(seq.clone());
    }
    by_group.into_iter().map(|(g, seqs)| MteGroup::new(g, seqs)).collect()
}

/// Mean top-k cross-entropy: the flat mean of per-poem cross-entropies
/// over all `N * K` generations, so groups weigh in by their own size.
pub fn mte(groups: &[MteGroup]) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::invalid("MTE of an empty group list"));
    }
    let ce: Vec<f64> = groups.iter().flat_map(|g| g.sequences.iter().map(cross_entropy_seq)).collect();
    mean(&ce).ok_or_else(|| Error::invalid("MTE groups hold no sequences"))
}

/// Token-weighted mean negative log-probability over the whole corpus.
pub fn micro_cross_entropy(corpus: &[TokenProbSequence]) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::invalid("cross-entropy of an empty corpus"));
    }
    let nll: Vec<f64> = corpus.iter().flat_map(|s| s.logp_true.iter().map(|lp| -lp)).collect();
    Ok(pairwise_sum(&nll) / nll.len() as f64)
}

/// `exp` of the token-weighted mean cross-entropy.
pub fn perplexity(corpus: &[TokenProbSequence]) -> Result<f64> {
    Ok(micro_cross_entropy(corpus)?.exp())
}
