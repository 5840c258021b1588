//! Forward values of the training objective: cycle-consistency,
//! supervised, sequence- and patch-adversarial terms and their weighted sum.
//!
//! Expectations are batch means. Discriminator scores are clamped to
//! `[SCORE_EPSILON, 1 - SCORE_EPSILON]` before any logarithm; the number
//! of clamped entries is kept on each batch/grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::mean;

pub const SCORE_EPSILON: f64 = 1e-7;

/// An original array and its reconstruction (or a ground truth and a
/// prediction).
#[derive(Debug, Clone, PartialEq)]
pub struct ReconPair {
    original: Vec<f64>,
    reconstruction: Vec<f64>,
}

impl ReconPair {
    pub fn new(original: Vec<f64>, reconstruction: Vec<f64>) -> Result<Self> {
        if original.len() != reconstruction.len() {
            return Err(Error::Dimension(format!(
                "original has {} elements, reconstruction {}",
                original.len(),
                reconstruction.len()
            )));
        }
        if original.is_empty() {
            return Err(Error::invalid("empty reconstruction pair"));
        }
        if original.iter().chain(&reconstruction).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value in reconstruction pair"));
        }
        Ok(ReconPair { original, reconstruction })
    }
}

/// Mean absolute difference over elements.
pub fn l1_mean(pair: &ReconPair) -> f64 {
    let diffs: Vec<f64> = pair.original.iter().zip(&pair.reconstruction).map(|(a, b)| (a - b).abs()).collect();
    mean(&diffs).unwrap_or(0.0)
}

fn mean_l1(pairs: &[ReconPair]) -> Option<f64> {
    let per_item: Vec<f64> = pairs.iter().map(l1_mean).collect();
    mean(&per_item)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleLoss {
    pub value: f64,
    pub painting_term: Option<f64>,
    pub poem_term: Option<f64>,
}

impl CycleLoss {
    /// True when one side had no pairs and contributed 0.
    pub fn one_sided(&self) -> bool {
        self.painting_term.is_none() || self.poem_term.is_none()
    }
}

/// Painting-side mean L1 plus poem-side mean L1. A side without pairs
/// contributes 0 and is reported as `None`.
pub fn cycle_loss(painting_pairs: &[ReconPair], poem_pairs: &[ReconPair]) -> Result<CycleLoss> {
    if painting_pairs.is_empty() && poem_pairs.is_empty() {
        return Err(Error::invalid("cycle loss needs at least one reconstruction pair"));
    }
    let painting_term = mean_l1(painting_pairs);
    let poem_term = mean_l1(poem_pairs);
    Ok(CycleLoss { value: painting_term.unwrap_or(0.0) + poem_term.unwrap_or(0.0), painting_term, poem_term })
}

/// Mean over paired examples of (poem L1 + painting L1). Entry `i` of each
/// list belongs to the same example.
pub fn supervised_loss(poem_pairs: &[ReconPair], painting_pairs: &[ReconPair]) -> Result<f64> {
    if poem_pairs.len() != painting_pairs.len() {
        return Err(Error::Dimension(format!(
            "{} poem terms for {} painting terms",
            poem_pairs.len(),
            painting_pairs.len()
        )));
    }
    if poem_pairs.is_empty() {
        return Err(Error::invalid("supervised loss needs paired examples"));
    }
    let per_example: Vec<f64> = poem_pairs.iter().zip(painting_pairs).map(|(t, p)| l1_mean(t) + l1_mean(p)).collect();
    Ok(mean(&per_example).expect("non-empty"))
}

fn clamp_scores(scores: &mut [f64], what: &str) -> Result<usize> {
    let mut clamped = 0;
    for s in scores.iter_mut() {
        if !s.is_finite() || !(0.0..=1.0).contains(s) {
            return Err(Error::invalid(format!("{what} score {s} outside [0, 1]")));
        }
        let c = s.clamp(SCORE_EPSILON, 1.0 - SCORE_EPSILON);
        if c != *s {
            clamped += 1;
            *s = c;
        }
    }
    Ok(clamped)
}

/// Scalar discriminator probabilities, one per sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarScoreBatch {
    scores: Vec<f64>,
    clamped: usize,
}

impl ScalarScoreBatch {
    pub fn new(mut scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::invalid("empty score batch"));
        }
        let clamped = clamp_scores(&mut scores, "sequence")?;
        Ok(ScalarScoreBatch { scores, clamped })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }

    fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        let v: Vec<f64> = self.scores.iter().map(|&s| f(s)).collect();
        mean(&v).expect("non-empty batch")
    }
}

/// `W x H` patch discriminator probabilities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchScoreGrid {
    width: usize,
    height: usize,
    scores: Vec<f64>,
    clamped: usize,
}

impl PatchScoreGrid {
    pub fn new(width: usize, height: usize, mut scores: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("score grid needs W, H >= 1"));
        }
        if scores.len() != width * height {
            return Err(Error::Dimension(format!("{} scores for a {width}x{height} grid", scores.len())));
        }
        let clamped = clamp_scores(&mut scores, "patch")?;
        Ok(PatchScoreGrid { width, height, scores, clamped })
    }

    pub fn filled(width: usize, height: usize, score: f64) -> Result<Self> {
        PatchScoreGrid::new(width, height, vec![score; width * height])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// `(1 / WH) sum BCE(S_ij, target)`.
    fn mean_bce(&self, target_real: bool) -> f64 {
        let v: Vec<f64> = self.scores.iter().map(|&s| if target_real { -s.ln() } else { -(1.0 - s).ln() }).collect();
        mean(&v).expect("non-empty grid")
    }
}

/// Generator-side term `E[log(1 - D(fake))]`; the generator minimizes it.
pub fn adv_generator_seq(fake: &ScalarScoreBatch) -> f64 {
    fake.mean_of(|s| (1.0 - s).ln())
}

/// Non-saturating generator term `-E[log D(fake)]`.
pub fn adv_generator_seq_non_saturating(fake: &ScalarScoreBatch) -> f64 {
    fake.mean_of(|s| -s.ln())
}

/// `E[log D(real)] + E[log(1 - D(fake))]`; the discriminator maximizes it.
pub fn adv_discriminator_seq(real: &ScalarScoreBatch, fake: &ScalarScoreBatch) -> f64 {
    real.mean_of(f64::ln) + fake.mean_of(|s| (1.0 - s).ln())
}

fn grid_mean(grids: &[PatchScoreGrid], target_real: bool, what: &str) -> Result<f64> {
    let per_grid: Vec<f64> = grids.iter().map(|g| g.mean_bce(target_real)).collect();
    mean(&per_grid).ok_or_else(|| Error::invalid(format!("no {what} score grids")))
}

/// Mean over grids of the pixel-wise BCE against an all-ones target.
pub fn patch_generator_loss(grids: &[PatchScoreGrid]) -> Result<f64> {
    grid_mean(grids, true, "generated")
}

/// Real grids against ones plus generated grids against zeros.
pub fn patch_discriminator_loss(real: &[PatchScoreGrid], fake: &[PatchScoreGrid]) -> Result<f64> {
    Ok(grid_mean(real, true, "real")? + grid_mean(fake, false, "generated")?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossWeights {
    pub lambda_sup: f64,
    pub lambda_adv: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { lambda_sup: 1.0, lambda_adv: 1.0 }
    }
}

impl LossWeights {
    pub fn new(lambda_sup: f64, lambda_adv: f64) -> Result<Self> {
        for (name, v) in [("lambda_sup", lambda_sup), ("lambda_adv", lambda_adv)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(LossWeights { lambda_sup, lambda_adv })
    }
}

/// `cyc + lambda_sup * sup + lambda_adv * (adv_seq + adv_patch)`.
pub fn full_objective(cyc: f64, sup: f64, adv_seq: f64, adv_patch: f64, w: LossWeights) -> Result<f64> {
    if [cyc, sup, adv_seq, adv_patch].iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite loss component".into()));
    }
    Ok(cyc + w.lambda_sup * sup + w.lambda_adv * (adv_seq + adv_patch))
}
