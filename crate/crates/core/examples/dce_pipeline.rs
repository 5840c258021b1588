//! Distribution Consistency Error: pooled PCA to 100 dimensions, a
//! Ledoit-Wolf Gaussian per domain, then the squared W2 distance.
//!
//! ```bash
//! cargo run --release --example dce_pipeline
//! ```

use inkbridge::corpus_io::FeatureMatrix;
use inkbridge::linalg::{ledoit_wolf, Estimator};
use inkbridge::metrics_visual::{dce, DceConfig, PcaFitScope};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rand_distr::StandardNormal;

/// `n` 512-d rows living on the span of `basis` (512 x 100).
fn embed(rng: &mut StdRng, basis: &DMatrix<f64>, n: usize, shift: f64, spread: f64) -> FeatureMatrix {
    let z = DMatrix::from_fn(n, basis.ncols(), |_, j| {
        shift + spread * (1.0 + j as f64 / 100.0) * rng.sample::<f64, _>(StandardNormal)
    });
    FeatureMatrix::from_matrix(z * basis.transpose(), None).expect("finite samples")
}

fn main() -> inkbridge::Result<()> {
    let mut rng = StdRng::seed_from_u64(11);
    let gaussian = DMatrix::from_fn(512, 100, |_, _| rng.sample::<f64, _>(StandardNormal));
    let basis = gaussian.qr().q();

    let paintings = embed(&mut rng, &basis, 1500, 0.0, 1.0);
    let aligned_poems = embed(&mut rng, &basis, 1500, 0.0, 1.0);
    let drifted_poems = embed(&mut rng, &basis, 1500, 0.3, 1.4);

    let cfg = DceConfig::default();
    let aligned = dce(&paintings, &aligned_poems, &cfg)?;
    let drifted = dce(&paintings, &drifted_poems, &cfg)?;
    println!("aligned domains: DCE {:.3}, variance retained {:.4}", aligned.value, aligned.variance_retained);
    println!("drifted domains: DCE {:.3}, variance retained {:.4}", drifted.value, drifted.variance_retained);
    if let Some((p, q)) = drifted.shrinkage {
        println!("Ledoit-Wolf intensities: paintings {p:.4}, poems {q:.4}");
    }

    let sample = DceConfig { estimator: Estimator::Sample, ..cfg };
    let per_domain = DceConfig { pca_fit_scope: PcaFitScope::PerDomain, ..cfg };
    println!("sample covariance:   {:.3}", dce(&paintings, &drifted_poems, &sample)?.value);
    println!("per-domain PCA fit:  {:.3}", dce(&paintings, &drifted_poems, &per_domain)?.value);

    // Three rows in 100 dimensions: the sample covariance is singular, the
    // shrunk one is not.
    let tiny = FeatureMatrix::from_matrix(DMatrix::from_fn(3, 100, |_, _| rng.sample(StandardNormal)), None)?;
    let lw = ledoit_wolf(&tiny)?;
    let smallest = lw.summary.cov().clone().symmetric_eigen().eigenvalues.min();
    println!("n=3, d=100: delta {:.3}, smallest eigenvalue {smallest:.3e}", lw.delta);
    Ok(())
}
