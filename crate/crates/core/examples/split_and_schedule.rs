//! Split a mixed paired/unpaired corpus 70/15/15 and plan one training
//! epoch at one pair per five unpaired items.
//!
//! ```bash
//! cargo run --example split_and_schedule
//! ```

use inkbridge::corpus_io::{schedule_batches, split_dataset, CorpusManifest, Genre, ManifestItem, Modality, Split};

fn main() -> inkbridge::Result<()> {
    let mut items = Vec::new();
    for i in 0..40 {
        let painting = format!("painting-{i:03}");
        let poem = format!("poem-{i:03}");
        items.push(ManifestItem::new(&painting, Modality::Painting).paired_with(&poem).with_genre(Genre::ALL[i % 4]));
        items.push(ManifestItem::new(&poem, Modality::Poem).paired_with(&painting));
    }
    for i in 0..220 {
        let modality = if i % 2 == 0 { Modality::Painting } else { Modality::Poem };
        items.push(ManifestItem::new(format!("solo-{i:03}"), modality));
    }
    let manifest = CorpusManifest::new(items)?;
    println!("manifest: {:?}", manifest.counts());

    let split = split_dataset(&manifest, [0.7, 0.15, 0.15], 42)?;
    for (s, count) in Split::ALL.iter().zip(split.counts()) {
        println!("{s:>5}: {count} items");
    }
    // Paired members always land together.
    assert_eq!(split.get("painting-007"), split.get("poem-007"));

    let plan = schedule_batches(&split, &manifest, 4, 5, 42)?;
    println!(
        "{} batches ({} full), unpaired pool recycled: {}",
        plan.batches.len(),
        plan.full_batches().count(),
        plan.unpaired_recycled
    );
    let first = &plan.batches[0];
    println!("first batch: {} pairs, {} unpaired", first.paired.len(), first.unpaired.len());
    for pair in &first.paired {
        println!("  {} <-> {}", pair.painting, pair.poem);
    }
    Ok(())
}
