//! Correlate automatic metrics with human ratings, item by item.
//!
//! ```bash
//! cargo run --example metric_validation
//! ```

use inkbridge::metrics_text::{bleu, char_prf, PoemPair};
use inkbridge::rng::Prng;
use inkbridge::validation::{correlate_metrics, pearson, MetricSeries, RatingTable};

fn main() -> inkbridge::Result<()> {
    let mut rng = Prng::new(99);
    let alphabet: Vec<char> = "山水月花风云春秋江雪松石".chars().collect();
    let reference: String = alphabet.iter().take(10).collect();

    // Each candidate keeps a random share of the reference characters;
    // raters see that share plus noise.
    let mut ids = Vec::new();
    let mut scores = Vec::new();
    let mut f1 = Vec::new();
    let mut bleu4 = Vec::new();
    for i in 0..60 {
        let keep = rng.next_f64();
        let cand: String = reference
            .chars()
            .map(|c| if rng.next_f64() < keep { c } else { alphabet[rng.below(alphabet.len() as u64) as usize] })
            .collect();
        let pair = PoemPair::from_strs(&cand, &[&reference])?;
        let id = format!("item{i:02}");
        f1.push((id.clone(), char_prf(&pair).f1));
        bleu4.push((id.clone(), bleu(&pair, 4)));
        let rate = |noise: f64| (1.0 + 4.0 * keep + noise).clamp(1.0, 5.0);
        scores.push(vec![rate(rng.next_f64() - 0.5), rate(2.0 * rng.next_f64() - 1.0), 1.0 + 4.0 * rng.next_f64()]);
        ids.push(id);
    }
    let criteria = vec!["quality".to_owned(), "fluency".to_owned(), "diversity".to_owned()];
    let ratings = RatingTable::new(ids, 1, criteria, scores)?;

    let metrics = [MetricSeries::new("char_f1", f1)?, MetricSeries::new("bleu", bleu4)?];
    let matrix = correlate_metrics(&metrics, &ratings)?;
    print!("{}", matrix.to_csv());

    let xs = [1.0, 2.0, 3.0, 4.0];
    println!("pearson of a line: {:?}", pearson(&xs, &[3.0, 5.0, 7.0, 9.0])?);
    println!("pearson with a constant: {:?}", pearson(&xs, &[2.0; 4])?);
    Ok(())
}
