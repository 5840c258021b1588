use serde::{Deserialize, Serialize};

use super::{CorpusManifest, Modality, Split, SplitAssignment};
use crate::error::{Error, Result};
use crate::rng::Prng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairIds {
    pub painting: String,
    pub poem: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub paired: Vec<PairIds>,
    pub unpaired: Vec<String>,
    /// Last batch of the epoch with fewer than `paired_per_batch` pairs.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub seed: u64,
    pub paired_per_batch: usize,
    pub ratio_k: usize,
    /// Set when the unpaired pool was smaller than the epoch's demand and
    /// had to be reshuffled and reused.
    pub unpaired_recycled: bool,
    pub batches: Vec<Batch>,
}

impl BatchPlan {
    pub fn full_batches(&self) -> impl Iterator<Item = &Batch> {
        self.batches.iter().filter(|b| !b.partial)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }
}

/// One epoch of training batches over the train split.
///
/// Every batch carries `ratio_k` unpaired items per pair. Pairs are used
/// once each; the unpaired pool is walked in shuffled order and reshuffled
/// whenever it runs dry.
pub fn schedule_batches(
    split: &SplitAssignment,
    manifest: &CorpusManifest,
    paired_per_batch: usize,
    ratio_k: usize,
    seed: u64,
) -> Result<BatchPlan> {
    if paired_per_batch == 0 {
        return Err(Error::invalid("paired_per_batch must be at least 1"));
    }
    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    for id in split.ids_in(Split::Train) {
        let item = manifest.get(id).ok_or_else(|| Error::invalid(format!("split assigns unknown id {id:?}")))?;
        match (&item.pair_id, item.modality) {
            (Some(poem), Modality::Painting) => {
                if split.get(poem) == Some(Split::Train) {
                    pairs.push(PairIds { painting: id.to_owned(), poem: poem.clone() });
                }
            }
            (Some(_), Modality::Poem) => {}
            (None, _) => unpaired.push(id.to_owned()),
        }
    }
    if pairs.is_empty() {
        return Err(Error::invalid("train split has no paired items"));
    }
    if ratio_k > 0 && unpaired.is_empty() {
        return Err(Error::invalid(format!("train split has no unpaired items but ratio 1:{ratio_k} needs them")));
    }

    let mut rng = Prng::new(seed);
    rng.shuffle(&mut pairs);
    rng.shuffle(&mut unpaired);

    let mut cursor = 0;
    let mut recycled = false;
    let mut batches = Vec::with_capacity(pairs.len().div_ceil(paired_per_batch));
    for chunk in pairs.chunks(paired_per_batch) {
        let demand = chunk.len() * ratio_k;
        let mut drawn = Vec::with_capacity(demand);
        while drawn.len() < demand {
            if cursor == unpaired.len() {
                rng.shuffle(&mut unpaired);
                cursor = 0;
                recycled = true;
            }
            drawn.push(unpaired[cursor].clone());
            cursor += 1;
        }
        batches.push(Batch { paired: chunk.to_vec(), unpaired: drawn, partial: chunk.len() < paired_per_batch });
    }
    Ok(BatchPlan { seed, paired_per_batch, ratio_k, unpaired_recycled: recycled, batches })
}
