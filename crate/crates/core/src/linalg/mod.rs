//! Dense statistics kernels: mean/covariance, Ledoit-Wolf shrinkage, PCA,
//! the PSD matrix square root and the closed-form Wasserstein-2 distance
//! between Gaussians.

mod pca;
mod shrinkage;

pub use pca::{pca_fit, pca_inverse_transform, pca_transform, PcaModel};
pub use shrinkage::{ledoit_wolf, ShrinkageResult};

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::corpus_io::FeatureMatrix;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Relative tolerance below zero for eigenvalues still treated as zero.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Which covariance estimator produced a [`GaussianSummary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Unbiased sample covariance, divisor `n - 1`.
    Sample,
    /// Ledoit-Wolf shrinkage toward a scaled identity, divisor `n`.
    LedoitWolf,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Estimator::Sample => "sample",
            Estimator::LedoitWolf => "ledoit_wolf",
        })
    }
}

/// Mean vector, covariance matrix and sample count of a feature
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    n: usize,
    estimator: Estimator,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SummaryJson {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    n: usize,
    estimator: Estimator,
}

impl GaussianSummary {
    /// Validates shapes and finiteness, symmetrizes `cov`, and rejects
    /// covariances with an eigenvalue below `-1e-8 * trace / d`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, n: usize, estimator: Estimator) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::invalid("Gaussian summary has zero dimensions"));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Dimension(format!(
                "mean has {d} entries but covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("Gaussian summary has non-finite entries"));
        }
        let cov = symmetrize(&cov);
        let trace = cov.trace();
        let floor = -PSD_TOLERANCE * trace.abs().max(f64::MIN_POSITIVE) / d as f64;
        let min_eig = SymmetricEigen::new(cov.clone()).eigenvalues.min();
        if min_eig < floor {
            return Err(Error::Numerical(format!("covariance is not positive semi-definite (eigenvalue {min_eig:e})")));
        }
        Ok(GaussianSummary { mean, cov, n, estimator })
    }

    /// For covariances that are exactly symmetric and PSD by construction.
    pub(crate) fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>, n: usize, estimator: Estimator) -> Self {
        GaussianSummary { mean, cov, n, estimator }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn to_json(&self) -> String {
        let d = self.dim();
        let json = SummaryJson {
            mean: self.mean.iter().copied().collect(),
            cov: (0..d).map(|i| self.cov.row(i).iter().copied().collect()).collect(),
            n: self.n,
            estimator: self.estimator,
        };
        let mut s = serde_json::to_string(&json).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: SummaryJson = serde_json::from_str(text).map_err(|e| Error::parse("Gaussian summary", e))?;
        let d = json.mean.len();
        if json.cov.len() != d || json.cov.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension(format!("covariance is not {d}x{d}")));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| json.cov[i][j]);
        GaussianSummary::new(DVector::from_vec(json.mean), cov, json.n, json.estimator)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = crate::corpus_io::read_to_string(path)?;
        GaussianSummary::from_json(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::corpus_io::write_string(path.as_ref(), &self.to_json())
    }
}

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Column means, each accumulated by pairwise summation.
pub(crate) fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.nrows() as f64;
    DVector::from_iterator(x.ncols(), x.column_iter().map(|col| pairwise_sum(col.as_slice()) / n))
}

pub(crate) fn centered(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for (mut col, m) in c.column_iter_mut().zip(mean.iter()) {
        col.add_scalar_mut(-m);
    }
    c
}

/// Sum of squares of the centered columns' cross products, divided by
/// `divisor`.
pub(crate) fn scatter(centered: &DMatrix<f64>, divisor: f64) -> DMatrix<f64> {
    symmetrize(&(centered.tr_mul(centered) / divisor))
}

/// Column mean and unbiased sample covariance (divisor `n - 1`).
pub fn mean_and_cov(x: &FeatureMatrix) -> Result<GaussianSummary> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid(format!("covariance needs at least 2 rows, got {n}")));
    }
    let mean = column_means(x.data());
    let cov = scatter(&centered(x.data(), &mean), (n - 1) as f64);
    Ok(GaussianSummary::from_parts(mean, cov, n, Estimator::Sample))
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue (ties
/// keep the solver's order). Eigenvectors are the columns of the returned
/// matrix.
pub(crate) fn sorted_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Principal square root of a symmetric positive semi-definite matrix.
///
/// Eigenvalues in `[-1e-8 * lambda_max, 0)` are clamped to zero; anything
/// more negative is an error. Eigenvalues below the numerical-rank cutoff
/// `d * eps * lambda_max` are also zeroed, so rounding noise in a null space
/// is not lifted to `sqrt(eps)` by the root.
pub fn sqrtm_psd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("sqrtm of a {}x{} matrix", a.nrows(), a.ncols())));
    }
    let scale = a.amax().max(1.0);
    let asym = (a - a.transpose()).amax();
    if asym > 1e-8 * scale {
        return Err(Error::invalid(format!("matrix is not symmetric (max asymmetry {asym:e})")));
    }
    let eig = SymmetricEigen::new(symmetrize(a));
    let lambda_max = eig.eigenvalues.max();
    let floor = -PSD_TOLERANCE * lambda_max.max(0.0);
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| l < floor) {
        return Err(Error::Numerical(format!(
            "matrix is not positive semi-definite (eigenvalue {bad:e}, largest {lambda_max:e})"
        )));
    }
    let cutoff = lambda_max.max(0.0) * a.nrows() as f64 * f64::EPSILON;
    let roots = eig.eigenvalues.map(|l| if l <= cutoff { 0.0 } else { l.sqrt() });
    let q = &eig.eigenvectors;
    let scaled = q * DMatrix::from_diagonal(&roots);
    Ok(symmetrize(&(scaled * q.transpose())))
}

/// Squared Wasserstein-2 distance between two Gaussians:
/// `|mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2)`.
pub fn wasserstein2_gaussian(g1: &GaussianSummary, g2: &GaussianSummary) -> Result<f64> {
    if g1.dim() != g2.dim() {
        return Err(Error::Dimension(format!("Gaussians of dimension {} and {}", g1.dim(), g2.dim())));
    }
    let diff = g1.mean() - g2.mean();
    let squares: Vec<f64> = diff.iter().map(|v| v * v).collect();
    let mean_term = pairwise_sum(&squares);

    let root1 = sqrtm_psd(g1.cov())?;
    let inner = symmetrize(&(&root1 * g2.cov() * &root1));
    let cross = sqrtm_psd(&inner)?.trace();

    let trace_sum = g1.cov().trace() + g2.cov().trace();
    let value = mean_term + trace_sum - 2.0 * cross;
    if value < 0.0 {
        if value >= -PSD_TOLERANCE * trace_sum.max(1.0) {
            return Ok(0.0);
        }
        return Err(Error::Numerical(format!("negative squared distance {value:e}")));
    }
    Ok(value)
}
