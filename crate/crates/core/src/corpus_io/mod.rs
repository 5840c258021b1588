//! On-disk formats, ingestion and validation, the deterministic dataset
//! split and the paired:unpaired batch scheduler.

mod features;
mod manifest;
mod schedule;
mod split;
mod token_probs;
mod tokenize;

pub use features::{load_features, save_features, FeatureMatrix};
pub use manifest::{load_manifest, save_manifest, CorpusManifest, Genre, ManifestCounts, ManifestItem, Modality};
pub use schedule::{schedule_batches, Batch, BatchPlan, PairIds};
pub use split::{split_dataset, Split, SplitAssignment};
pub use token_probs::{load_token_probs, parse_token_probs, TokenProbOptions, TokenProbSequence, MAX_POEM_LEN};
pub use tokenize::{is_cjk_punctuation, tokenize_chars, tokenize_chars_with, TokenizeOptions};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
