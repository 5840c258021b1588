//! Evaluation toolkit for cycle-consistent poem/painting translation:
//! corpus handling, text and visual metrics, the training-objective terms,
//! decoding, and validation of metrics against human ratings.
//!
//! Each capability has a runnable example:
//!
//! | example | shows |
//! |---|---|
//! | `split_and_schedule` | 70/15/15 split with paired items kept together, 1:5 batch plan |
//! | `text_metrics` | character P/R/F1, BLEU, METEOR, MCE, MTE, perplexity |
//! | `frechet_distance` | Gaussian summaries, matrix square root, W2, FID |
//! | `dce_pipeline` | pooled PCA, Ledoit-Wolf shrinkage, DCE |
//! | `losses` | cycle, supervised, adversarial and patch losses, full objective |
//! | `sampling` | top-k, nucleus and greedy decoding with a seeded generator |
//! | `metric_validation` | Pearson correlation of metrics against ratings |
//! | `reports` | JSON/CSV metric reports and the summary table |
//!
//! ```bash
//! cargo run --example text_metrics
//! ```
//!
//! The `inkbridge` binary wraps the same functions as subcommands over
//! files; see [`cli`].

pub mod cli;
pub mod corpus_io;
pub mod error;
pub mod linalg;
pub mod losses;
pub mod metrics_text;
pub mod metrics_visual;
pub mod numeric;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod validation;

pub use error::{Error, Result};
