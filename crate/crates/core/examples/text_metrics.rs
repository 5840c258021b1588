//! Character-level overlap metrics on poem pairs and the language-model
//! metrics (MCE, MTE, perplexity) on per-token log-probabilities.
//!
//! ```bash
//! cargo run --example text_metrics
//! ```

use inkbridge::corpus_io::{tokenize_chars, TokenProbSequence};
use inkbridge::metrics_text::{
    bleu, char_prf, group_sequences, mce, meteor_alignment, meteor_simplified, mte, perplexity, PoemPair,
};
use inkbridge::rng::Prng;

fn main() -> inkbridge::Result<()> {
    let pairs = [
        ("空山新雨后，天气晚来秋。", vec!["空山新雨後，天氣晚來秋。", "空山雨后天气秋"]),
        ("明月松间照", vec!["明月松間照，清泉石上流。"]),
        ("ABCD", vec!["ABCDE"]),
    ];
    println!("{:<14} {:>6} {:>6} {:>6} {:>6} {:>7}", "candidate", "P", "R", "F1", "BLEU", "METEOR");
    for (cand, refs) in &pairs {
        let pair = PoemPair::new(tokenize_chars(cand), refs.iter().map(|r| tokenize_chars(r)).collect())?;
        let prf = char_prf(&pair);
        println!(
            "{:<14} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>7.3}",
            cand.chars().take(5).collect::<String>(),
            prf.precision,
            prf.recall,
            prf.f1,
            bleu(&pair, 4),
            meteor_simplified(&pair)
        );
    }
    let swapped = meteor_alignment(&['A', 'B', 'C', 'D'], &['C', 'D', 'A', 'B']);
    println!("ABCD vs CDAB: {} matches in {} chunks", swapped.matches, swapped.chunks);

    // Five prompts with three generations each; log-probs drawn uniformly
    // from [-3, 0).
    let mut rng = Prng::new(7);
    let mut corpus = Vec::new();
    for prompt in 0..5 {
        for draw in 0..3 {
            let len = 5 + (rng.below(20) as usize);
            let logp: Vec<f64> = (0..len).map(|_| -3.0 * rng.next_f64()).collect();
            let seq = TokenProbSequence::new(format!("p{prompt}-{draw}"), vec!['字'; len], logp)?;
            corpus.push(seq.with_group(format!("p{prompt}")));
        }
    }
    let groups = group_sequences(&corpus)?;
    println!("MCE {:.4}  MTE {:.4}  PPL {:.4}", mce(&corpus)?, mte(&groups)?, perplexity(&corpus)?);
    Ok(())
}
