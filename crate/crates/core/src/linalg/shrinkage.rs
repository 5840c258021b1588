//! Ledoit-Wolf shrinkage toward a scaled identity.
//!
//! With centered rows `x_k`, `S = (1/n) sum x_k x_k^T` and the normalized
//! inner product `<A, B> = tr(A B^T) / d`:
//!
//! ```text
//! m      = <S, I>
//! d2     = |S - m I|^2
//! b2_bar = (1/n^2) sum_k |x_k x_k^T - S|^2
//! b2     = min(b2_bar, d2)
//! delta  = b2 / d2
//! S_lw   = delta m I + (1 - delta) S
//! ```
//!
//! `sum_k |x_k x_k^T - S|_F^2` equals `sum_k |x_k|^4 - n |S|_F^2`, which
//! avoids forming the `n` outer products.

use super::{centered, column_means, scatter, Estimator, GaussianSummary};
use crate::corpus_io::FeatureMatrix;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageResult {
    pub summary: GaussianSummary,
    /// Shrinkage intensity in `[0, 1]`.
    pub delta: f64,
    /// `m = trace(S) / d`, the scale of the identity target.
    pub target_scale: f64,
}

pub fn ledoit_wolf(x: &FeatureMatrix) -> Result<ShrinkageResult> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid(format!("Ledoit-Wolf needs at least 2 rows, got {n}")));
    }
    let d = x.ncols();
    let mean = column_means(x.data());
    let xc = centered(x.data(), &mean);
    let s = scatter(&xc, n as f64);

    let m = s.trace() / d as f64;
    let mut off_target = s.clone();
    for i in 0..d {
        off_target[(i, i)] -= m;
    }
    let d2 = off_target.norm_squared() / d as f64;

    let fourth_powers: Vec<f64> = xc.row_iter().map(|r| r.norm_squared().powi(2)).collect();
    let outer_dev = (pairwise_sum(&fourth_powers) - n as f64 * s.norm_squared()).max(0.0);
    let b2_bar = outer_dev / (n as f64 * n as f64) / d as f64;
    let b2 = b2_bar.min(d2);
    let delta = if d2 > 0.0 { (b2 / d2).clamp(0.0, 1.0) } else { 0.0 };

    let mut shrunk = s * (1.0 - delta);
    for i in 0..d {
        shrunk[(i, i)] += delta * m;
    }
    Ok(ShrinkageResult {
        summary: GaussianSummary::from_parts(mean, shrunk, n, Estimator::LedoitWolf),
        delta,
        target_scale: m,
    })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;

    #[test]
    fn isotropic_sample_is_left_alone() {
        // Rows +-e_i give S = (2/(2d)) I exactly.
        let d = 4;
        let mut data = DMatrix::zeros(2 * d, d);
        for i in 0..d {
            data[(2 * i, i)] = 1.0;
            data[(2 * i + 1, i)] = -1.0;
        }
        let x = FeatureMatrix::from_matrix(data, None).unwrap();
        let r = ledoit_wolf(&x).unwrap();
        let expected = DMatrix::<f64>::identity(d, d) * (1.0 / d as f64);
        assert!((r.summary.cov() - expected).amax() < 1e-15);
        assert!((r.target_scale - 0.25).abs() < 1e-15);
    }

    #[test]
    fn needs_two_rows() {
        let x = FeatureMatrix::from_matrix(DMatrix::from_element(1, 3, 1.0), None).unwrap();
        assert!(ledoit_wolf(&x).is_err());
    }

    #[test]
    fn identical_rows_give_zero() {
        let x = FeatureMatrix::from_matrix(DMatrix::from_element(5, 3, 2.0), None).unwrap();
        let r = ledoit_wolf(&x).unwrap();
        assert_eq!(r.delta, 0.0);
        assert!(r.summary.cov().iter().all(|&v| v == 0.0));
    }
}
