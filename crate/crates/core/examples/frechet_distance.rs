//! Gaussian summaries, the closed-form Wasserstein-2 distance and the
//! FID-style Fréchet distance between two feature sets.
//!
//! ```bash
//! cargo run --example frechet_distance
//! ```

use inkbridge::corpus_io::FeatureMatrix;
use inkbridge::linalg::{mean_and_cov, sqrtm_psd, wasserstein2_gaussian, Estimator, GaussianSummary};
use inkbridge::metrics_visual::{frechet_distance, frechet_distance_with};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rand_distr::StandardNormal;

fn gaussian_features(rng: &mut StdRng, n: usize, d: usize, shift: f64, scale: f64) -> FeatureMatrix {
    let data = DMatrix::from_fn(n, d, |_, _| shift + scale * rng.sample::<f64, _>(StandardNormal));
    FeatureMatrix::from_matrix(data, None).expect("finite samples")
}

fn main() -> inkbridge::Result<()> {
    let one_d = |m: f64, v: f64| {
        GaussianSummary::new(DVector::from_element(1, m), DMatrix::from_element(1, 1, v), 2, Estimator::Sample)
    };
    println!("W2^2 N(0,1) vs N(3,1): {}", wasserstein2_gaussian(&one_d(0.0, 1.0)?, &one_d(3.0, 1.0)?)?);
    println!("W2^2 N(0,1) vs N(0,4): {}", wasserstein2_gaussian(&one_d(0.0, 1.0)?, &one_d(0.0, 4.0)?)?);

    let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
    let root = sqrtm_psd(&a)?;
    println!("sqrtm residual: {:.2e}", (&root * &root - &a).norm());

    let mut rng = StdRng::seed_from_u64(3);
    let real = gaussian_features(&mut rng, 5000, 4, 0.0, 1.0);
    let generated = gaussian_features(&mut rng, 5000, 4, 3.0, 1.0);
    println!("FID, 4-d, mean shift 3 per axis: {:.3} (analytic 36)", frechet_distance(&real, &generated)?);
    let shrunk = frechet_distance_with(&real, &generated, Estimator::LedoitWolf)?;
    println!("same with Ledoit-Wolf covariances: {shrunk:.3}");

    let summary = mean_and_cov(&real)?;
    println!("cached summary is {} bytes of JSON", summary.to_json().len());
    Ok(())
}
