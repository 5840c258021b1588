use nalgebra::{DMatrix, DVector};

use super::{centered, mean_and_cov, sorted_eigen};
use crate::corpus_io::FeatureMatrix;
use crate::error::{Error, Result};

/// Principal axes of a fitted feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// `q x d`, orthonormal rows, each with its largest-magnitude entry
    /// positive.
    pub components: DMatrix<f64>,
    /// Descending, non-negative.
    pub eigenvalues: DVector<f64>,
    pub variance_retained: f64,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.components.nrows()
    }
}

/// Eigendecomposition of the sample covariance (divisor `n - 1`), keeping
/// the `target_dim` leading axes.
pub fn pca_fit(x: &FeatureMatrix, target_dim: usize) -> Result<PcaModel> {
    let (n, d) = (x.nrows(), x.ncols());
    let max_dim = n.saturating_sub(1).min(d);
    if target_dim == 0 || target_dim > max_dim {
        return Err(Error::invalid(format!(
            "PCA target dimension {target_dim} outside 1..={max_dim} for {n} rows of width {d}"
        )));
    }
    let summary = mean_and_cov(x)?;
    let (values, vectors) = sorted_eigen(summary.cov());
    let values = values.map(|v| v.max(0.0));
    let total = values.sum();
    if total <= 0.0 {
        return Err(Error::Numerical("PCA input has zero variance".into()));
    }
    let mut components = DMatrix::zeros(target_dim, d);
    for k in 0..target_dim {
        let axis = vectors.column(k);
        let pivot = axis.iter().enumerate().fold(0, |best, (i, v)| if v.abs() > axis[best].abs() { i } else { best });
        let sign = if axis[pivot] < 0.0 { -1.0 } else { 1.0 };
        components.row_mut(k).copy_from(&(axis.transpose() * sign));
    }
    let kept = values.rows(0, target_dim).into_owned();
    let variance_retained = (kept.sum() / total).min(1.0);
    Ok(PcaModel { mean: summary.mean().clone(), components, eigenvalues: kept, variance_retained })
}

/// `(X - mean) * components^T`. Ids and modality carry over.
pub fn pca_transform(model: &PcaModel, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.ncols() != model.input_dim() {
        return Err(Error::Dimension(format!("PCA model expects width {}, got {}", model.input_dim(), x.ncols())));
    }
    let projected = centered(x.data(), &model.mean) * model.components.transpose();
    FeatureMatrix::new(x.ids().to_vec(), projected, x.modality())
}

/// Maps projected rows back into the input space: `Z * components + mean`.
pub fn pca_inverse_transform(model: &PcaModel, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if z.ncols() != model.output_dim() {
        return Err(Error::Dimension(format!(
            "PCA model has {} components, got width {}",
            model.output_dim(),
            z.ncols()
        )));
    }
    let mut out = z * &model.components;
    for mut row in out.row_iter_mut() {
        row += model.mean.transpose();
    }
    Ok(out)
}
