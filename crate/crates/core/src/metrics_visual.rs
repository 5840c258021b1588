//! Painting-side and cross-modal metrics: Fréchet distance between feature
//! distributions, Distribution Consistency Error and genre accuracy.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::corpus_io::{FeatureMatrix, Genre};
use crate::error::{Error, Result};
use crate::linalg::{
    ledoit_wolf, mean_and_cov, pca_fit, pca_transform, wasserstein2_gaussian, Estimator, GaussianSummary,
};

/// Default PCA width for DCE.
pub const DEFAULT_DCE_PCA_DIM: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaFitScope {
    /// One PCA fitted on paintings and poems together.
    Pooled,
    /// A separate PCA per domain (ablation only: the two bases differ).
    PerDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DceConfig {
    pub pca_dim: usize,
    pub estimator: Estimator,
    pub pca_fit_scope: PcaFitScope,
    /// Z-score every column with pooled statistics before PCA.
    pub standardize: bool,
}

impl Default for DceConfig {
    fn default() -> Self {
        DceConfig {
            pca_dim: DEFAULT_DCE_PCA_DIM,
            estimator: Estimator::LedoitWolf,
            pca_fit_scope: PcaFitScope::Pooled,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DceOutcome {
    /// Squared Wasserstein-2 distance in the reduced space.
    pub value: f64,
    pub pca_dim: usize,
    /// Fraction of variance kept by the PCA (mean of the two fits when
    /// fitted per domain).
    pub variance_retained: f64,
    pub estimator: Estimator,
    /// Ledoit-Wolf intensities for (paintings, poems), when used.
    pub shrinkage: Option<(f64, f64)>,
}

pub fn summarize(x: &FeatureMatrix, estimator: Estimator) -> Result<(GaussianSummary, Option<f64>)> {
    match estimator {
        Estimator::Sample => Ok((mean_and_cov(x)?, None)),
        Estimator::LedoitWolf => {
            let r = ledoit_wolf(x)?;
            Ok((r.summary, Some(r.delta)))
        }
    }
}

fn check_widths(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<()> {
    if a.ncols() != b.ncols() {
        return Err(Error::Dimension(format!("feature widths differ: {} vs {}", a.ncols(), b.ncols())));
    }
    Ok(())
}

/// Squared Fréchet distance between Gaussian fits of two feature sets,
/// each with the unbiased sample covariance.
pub fn frechet_distance(real: &FeatureMatrix, generated: &FeatureMatrix) -> Result<f64> {
    frechet_distance_with(real, generated, Estimator::Sample)
}

pub fn frechet_distance_with(real: &FeatureMatrix, generated: &FeatureMatrix, estimator: Estimator) -> Result<f64> {
    check_widths(real, generated)?;
    let (g1, _) = summarize(real, estimator)?;
    let (g2, _) = summarize(generated, estimator)?;
    wasserstein2_gaussian(&g1, &g2)
}

fn stack(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix> {
    let (na, nb, d) = (a.nrows(), b.nrows(), a.ncols());
    let data = DMatrix::from_fn(na + nb, d, |i, j| if i < na { a.data()[(i, j)] } else { b.data()[(i - na, j)] });
    let ids = a.ids().iter().chain(b.ids()).cloned().collect();
    FeatureMatrix::new(ids, data, None)
}

fn standardize_both(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let pooled = mean_and_cov(&stack(a, b)?)?;
    let scale: Vec<f64> = pooled.cov().diagonal().iter().map(|v| if *v > 0.0 { v.sqrt() } else { 1.0 }).collect();
    let apply = |x: &FeatureMatrix| {
        let data = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x.data()[(i, j)] - pooled.mean()[j]) / scale[j]);
        FeatureMatrix::new(x.ids().to_vec(), data, x.modality())
    };
    Ok((apply(a)?, apply(b)?))
}

/// Distribution Consistency Error between painting and poem features.
///
/// Rows are put in canonical order (paintings then poems, each sorted by
/// id), reduced to `pca_dim` with PCA, summarized per domain with the
/// configured estimator, and compared with the squared Wasserstein-2
/// distance.
pub fn dce(paintings: &FeatureMatrix, poems: &FeatureMatrix, cfg: &DceConfig) -> Result<DceOutcome> {
    check_widths(paintings, poems)?;
    if cfg.pca_dim == 0 {
        return Err(Error::invalid("pca_dim must be at least 1"));
    }
    if cfg.pca_dim > paintings.ncols() {
        return Err(Error::invalid(format!("pca_dim {} exceeds feature width {}", cfg.pca_dim, paintings.ncols())));
    }
    for (name, x) in [("paintings", paintings), ("poems", poems)] {
        if x.nrows() < cfg.pca_dim + 1 {
            return Err(Error::invalid(format!(
                "{name}: {} rows, DCE with pca_dim {} needs at least {}",
                x.nrows(),
                cfg.pca_dim,
                cfg.pca_dim + 1
            )));
        }
    }
    let (a, b) = (paintings.sorted_by_id(), poems.sorted_by_id());
    let (a, b) = if cfg.standardize { standardize_both(&a, &b)? } else { (a, b) };

    let (ra, rb, variance_retained) = match cfg.pca_fit_scope {
        PcaFitScope::Pooled => {
            let model = pca_fit(&stack(&a, &b)?, cfg.pca_dim)?;
            (pca_transform(&model, &a)?, pca_transform(&model, &b)?, model.variance_retained)
        }
        PcaFitScope::PerDomain => {
            let ma = pca_fit(&a, cfg.pca_dim)?;
            let mb = pca_fit(&b, cfg.pca_dim)?;
            let retained = 0.5 * (ma.variance_retained + mb.variance_retained);
            (pca_transform(&ma, &a)?, pca_transform(&mb, &b)?, retained)
        }
    };
    let (ga, da) = summarize(&ra, cfg.estimator)?;
    let (gb, db) = summarize(&rb, cfg.estimator)?;
    let value = wasserstein2_gaussian(&ga, &gb)?;
    Ok(DceOutcome { value, pca_dim: cfg.pca_dim, variance_retained, estimator: cfg.estimator, shrinkage: da.zip(db) })
}

/// Genre labels keyed by item id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: BTreeMap<String, Genre>,
}

impl LabelSet {
    pub fn new(ids: Vec<String>, labels: Vec<Genre>) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::Dimension(format!("{} ids for {} labels", ids.len(), labels.len())));
        }
        let mut map = BTreeMap::new();
        for (id, label) in ids.into_iter().zip(labels) {
            if map.contains_key(&id) {
                return Err(Error::invalid(format!("duplicate label id {id:?}")));
            }
            map.insert(id, label);
        }
        Ok(LabelSet { labels: map })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<Genre> {
        self.labels.get(id).copied()
    }

    /// CSV with header `id,genre`.
    pub fn from_csv(text: &str, context: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::parse(context, e))?.clone();
        if header.iter().map(str::trim).collect::<Vec<_>>() != ["id", "genre"] {
            return Err(Error::parse(context, "header must be \"id,genre\""));
        }
        let (mut ids, mut labels) = (Vec::new(), Vec::new());
        for record in reader.records() {
            let record = record.map_err(|e| Error::parse(context, e))?;
            let id = record.get(0).unwrap_or("").trim().to_owned();
            let genre = record
                .get(1)
                .unwrap_or("")
                .trim()
                .parse::<Genre>()
                .map_err(|e| Error::invalid(format!("{context}: id {id:?}: {e}")))?;
            ids.push(id);
            labels.push(genre);
        }
        LabelSet::new(ids, labels).map_err(|e| Error::invalid(format!("{context}: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = crate::corpus_io::read_to_string(path)?;
        LabelSet::from_csv(&text, &path.display().to_string())
    }
}

/// Fraction of ids whose predicted genre equals the true one, matched by id.
pub fn genre_accuracy(pred: &LabelSet, truth: &LabelSet) -> Result<f64> {
    let pred_ids: BTreeSet<&String> = pred.labels.keys().collect();
    let truth_ids: BTreeSet<&String> = truth.labels.keys().collect();
    if pred_ids != truth_ids {
        let missing = truth_ids.symmetric_difference(&pred_ids).next().map(|s| s.as_str());
        return Err(Error::invalid(format!(
            "prediction and truth id sets differ (e.g. {:?})",
            missing.unwrap_or_default()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("no labels to compare"));
    }
    let agree = truth.labels.iter().filter(|(id, g)| pred.get(id) == Some(**g)).count();
    Ok(agree as f64 / truth.len() as f64)
}
