//! Forward evaluation of the training objective: cycle and supervised L1
//! terms, sequence and patch adversarial terms, and their weighted sum.
//!
//! ```bash
//! cargo run --example losses
//! ```

use inkbridge::losses::{
    adv_discriminator_seq, adv_generator_seq, adv_generator_seq_non_saturating, cycle_loss, full_objective,
    patch_discriminator_loss, patch_generator_loss, supervised_loss, LossWeights, PatchScoreGrid, ReconPair,
    ScalarScoreBatch,
};

fn main() -> inkbridge::Result<()> {
    let paintings = [
        ReconPair::new(vec![0.1, 0.5, 0.9, 0.3], vec![0.2, 0.5, 0.7, 0.3])?,
        ReconPair::new(vec![0.0, 1.0, 0.0, 1.0], vec![0.1, 0.9, 0.0, 1.0])?,
    ];
    let poems = [ReconPair::new(vec![0.2; 6], vec![0.25; 6])?];
    let cycle = cycle_loss(&paintings, &poems)?;
    println!("cycle {:.4} (paintings {:?}, poems {:?})", cycle.value, cycle.painting_term, cycle.poem_term);

    let sup = supervised_loss(&poems, &paintings[..1])?;
    println!("supervised {sup:.4}");

    let real = ScalarScoreBatch::new(vec![0.9, 0.8, 0.95])?;
    let fake = ScalarScoreBatch::new(vec![0.1, 0.3, 1.0])?;
    println!("fake batch had {} score(s) clamped", fake.clamped());
    let adv_seq = adv_generator_seq(&fake);
    println!(
        "sequence adversarial: generator {adv_seq:.4}, non-saturating {:.4}, discriminator {:.4}",
        adv_generator_seq_non_saturating(&fake),
        adv_discriminator_seq(&real, &fake)
    );

    // A 64x64 patch grid next to a smaller one; grid sizes may differ.
    let large: Vec<f64> = (0..64 * 64).map(|i| 0.2 + 0.6 * (i % 7) as f64 / 6.0).collect();
    let fake_grids = [PatchScoreGrid::new(64, 64, large)?, PatchScoreGrid::filled(4, 3, 0.5)?];
    let real_grids = [PatchScoreGrid::filled(8, 8, 0.85)?];
    let patch_gen = patch_generator_loss(&fake_grids)?;
    let patch_disc = patch_discriminator_loss(&real_grids, &fake_grids)?;
    println!("patch: generator {patch_gen:.4}, discriminator {patch_disc:.4}");

    let weights = LossWeights::new(1.0, 0.5)?;
    let total = full_objective(cycle.value, sup, adv_seq, -patch_disc, weights)?;
    println!("full objective with lambda_sup=1, lambda_adv=0.5: {total:.4}");
    Ok(())
}
