mod common;

use std::collections::BTreeSet;

use inkbridge::corpus_io::{
    schedule_batches, split_dataset, CorpusManifest, FeatureMatrix, ManifestItem, Modality, Split, SplitAssignment,
    TokenProbSequence,
};
use inkbridge::linalg::{ledoit_wolf, sqrtm_psd, wasserstein2_gaussian, Estimator, GaussianSummary};
use inkbridge::losses::{
    adv_discriminator_seq, cycle_loss, full_objective, patch_discriminator_loss, patch_generator_loss, supervised_loss,
    LossWeights, PatchScoreGrid, ReconPair, ScalarScoreBatch,
};
use inkbridge::metrics_text::{
    bleu, char_prf, group_sequences, mce, micro_cross_entropy, mte, perplexity, MteGroup, PoemPair,
};
use inkbridge::rng::Prng;
use inkbridge::sampling::{nucleus_support, sample, top_k_support, LogitVector, SamplingConfig, Strategy as Decoding};
use inkbridge::validation::{correlate_metrics, pearson, MetricSeries, RatingTable};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0f64..3.0, rows * cols).prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
}

fn psd(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..=d + 2).prop_flat_map(move |k| matrix(d, k)).prop_map(|b| {
        let a = &b * b.transpose();
        (&a + a.transpose()) * 0.5
    })
}

fn gaussian(d: usize) -> impl Strategy<Value = GaussianSummary> {
    (prop::collection::vec(-5.0f64..5.0, d), psd(d))
        .prop_map(|(m, c)| GaussianSummary::new(DVector::from_vec(m), c, 10, Estimator::Sample).unwrap())
}

/// `n` items, a random subset mutually paired painting/poem.
fn manifest(n: usize, pairs: usize) -> CorpusManifest {
    let mut items = Vec::new();
    for i in 0..pairs {
        items.push(ManifestItem::new(format!("pa{i:04}"), Modality::Painting).paired_with(format!("po{i:04}")));
        items.push(ManifestItem::new(format!("po{i:04}"), Modality::Poem).paired_with(format!("pa{i:04}")));
    }
    for i in 0..n.saturating_sub(2 * pairs) {
        let modality = if i % 2 == 0 { Modality::Painting } else { Modality::Poem };
        items.push(ManifestItem::new(format!("u{i:05}"), modality));
    }
    CorpusManifest::new(items).unwrap()
}

fn seq(id: usize, group: usize, logp: Vec<f64>) -> TokenProbSequence {
    let chars = vec!['字'; logp.len()];
    TokenProbSequence::new(format!("s{id}"), chars, logp).unwrap().with_group(format!("g{group}"))
}

fn corpus() -> impl Strategy<Value = Vec<TokenProbSequence>> {
    prop::collection::vec((0usize..4, prop::collection::vec(-8.0f64..0.0, 1..20)), 1..12)
        .prop_map(|v| v.into_iter().enumerate().map(|(i, (g, lp))| seq(i, g, lp)).collect())
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['山', '水', '月', '花', '风']), 1..15)
        .prop_map(|v| v.into_iter().collect())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn split_is_a_bijection_within_tolerance(n in 3usize..150, pair_frac in 0.0f64..0.4, seed in any::<u64>()) {
        let pairs = ((n as f64 * pair_frac) as usize) / 2;
        let m = manifest(n, pairs);
        let ratios = [0.7, 0.15, 0.15];
        let a = split_dataset(&m, ratios, seed).unwrap();
        let ids: BTreeSet<&str> = m.items().iter().map(|i| i.id.as_str()).collect();
        let assigned: BTreeSet<&str> = a.assignment.keys().map(String::as_str).collect();
        prop_assert_eq!(ids, assigned);
        let slack = if pairs > 0 { 2.0 } else { 1.0 };
        for (count, r) in a.counts().iter().zip(ratios) {
            prop_assert!((*count as f64 - (r * m.len() as f64).round()).abs() <= slack);
        }
        for item in m.items() {
            if let Some(p) = &item.pair_id {
                prop_assert_eq!(a.get(&item.id), a.get(p));
            }
        }
        prop_assert_eq!(&a, &split_dataset(&m, ratios, seed).unwrap());
        prop_assert_eq!(SplitAssignment::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn schedule_keeps_ratio(pairs in 1usize..30, extra in 0usize..80, per_batch in 1usize..6, k in 0usize..7, seed in any::<u64>()) {
        let m = manifest(2 * pairs + extra.max(1), pairs);
        let all_train = SplitAssignment {
            seed,
            ratios: [1.0 / 3.0; 3],
            assignment: m.items().iter().map(|i| (i.id.clone(), Split::Train)).collect(),
        };
        let plan = schedule_batches(&all_train, &m, per_batch, k, seed).unwrap();
        for b in &plan.batches {
            prop_assert_eq!(b.unpaired.len(), k * b.paired.len());
            if !b.partial {
                prop_assert_eq!(b.paired.len(), per_batch);
            }
        }
        let used: Vec<&str> = plan.batches.iter().flat_map(|b| b.paired.iter().map(|p| p.painting.as_str())).collect();
        let distinct: BTreeSet<&str> = used.iter().copied().collect();
        prop_assert_eq!(used.len(), distinct.len());
        prop_assert_eq!(used.len(), pairs);
        if !plan.unpaired_recycled {
            let un: Vec<&str> = plan.batches.iter().flat_map(|b| b.unpaired.iter().map(String::as_str)).collect();
            prop_assert_eq!(un.len(), un.iter().collect::<BTreeSet<_>>().len());
        }
    }

    #[test]
    fn manifest_round_trip_is_byte_identical(n in 1usize..40, pairs in 0usize..10) {
        let m = manifest(n.max(2 * pairs), pairs);
        let json = m.to_json();
        prop_assert_eq!(CorpusManifest::from_json(&json).unwrap().to_json(), json);
    }

    #[test]
    fn feature_csv_round_trip(data in matrix(4, 3)) {
        let f = FeatureMatrix::from_matrix(data, None).unwrap();
        let back = FeatureMatrix::from_csv(&f.to_csv(), None, "p").unwrap();
        prop_assert_eq!(back.data(), f.data());
    }

    #[test]
    fn w2_symmetric_and_non_negative(g1 in gaussian(4), g2 in gaussian(4)) {
        let a = wasserstein2_gaussian(&g1, &g2).unwrap();
        let b = wasserstein2_gaussian(&g2, &g1).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
        prop_assert!(wasserstein2_gaussian(&g1, &g1).unwrap() < 1e-8 * g1.cov().trace().max(1.0));
    }

    #[test]
    fn sqrtm_squares_back(a in psd(6)) {
        prop_assume!(a.norm() > 1e-6);
        let x = sqrtm_psd(&a).unwrap();
        prop_assert!((&x * &x - &a).norm() / a.norm() < 1e-8);
    }

    #[test]
    fn ledoit_wolf_eigen_bounds(x in (2usize..12, 1usize..8).prop_flat_map(|(n, d)| matrix(n, d))) {
        let f = FeatureMatrix::from_matrix(x.clone(), None).unwrap();
        let lw = ledoit_wolf(&f).unwrap();
        prop_assert!((0.0..=1.0).contains(&lw.delta));
        let n = x.nrows() as f64;
        let mean = x.row_mean();
        let mut c = x.clone();
        for mut row in c.row_iter_mut() {
            row -= &mean;
        }
        let s = c.transpose() * &c / n;
        let es = SymmetricEigen::new(s).eigenvalues;
        let el = SymmetricEigen::new(lw.summary.cov().clone()).eigenvalues;
        let lo = es.min().min(lw.target_scale);
        let hi = es.max().max(lw.target_scale);
        let tol = 1e-10 * hi.abs().max(1.0);
        prop_assert!(el.iter().all(|&e| e >= lo - tol && e <= hi + tol));
    }

    #[test]
    fn text_corpus_metrics_reorder_and_identities(c in corpus(), rot in 0usize..12) {
        let mut shuffled = c.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        prop_assert!(close(mce(&c).unwrap(), mce(&shuffled).unwrap(), 1e-12));
        prop_assert!(close(perplexity(&c).unwrap(), perplexity(&shuffled).unwrap(), 1e-12));
        let g1 = group_sequences(&c).unwrap();
        let g2 = group_sequences(&shuffled).unwrap();
        prop_assert!(close(mte(&g1).unwrap(), mte(&g2).unwrap(), 1e-12));
        prop_assert!(close(perplexity(&c).unwrap(), micro_cross_entropy(&c).unwrap().exp(), 1e-12));
        let singletons: Vec<MteGroup> =
            c.iter().map(|s| MteGroup::new(s.group_id.clone().unwrap(), vec![s.clone()]).unwrap()).collect();
        prop_assert_eq!(mte(&singletons).unwrap(), mce(&c).unwrap());
        prop_assert!(mce(&c).unwrap().is_finite());
    }

    #[test]
    fn overlap_metrics_bounds(c in text(), r in text()) {
        let pair = PoemPair::from_strs(&c, &[&r]).unwrap();
        let prf = char_prf(&pair);
        let swapped = char_prf(&PoemPair::from_strs(&r, &[&c]).unwrap());
        prop_assert_eq!((prf.precision, prf.recall), (swapped.recall, swapped.precision));
        let b = bleu(&pair, 4);
        prop_assert!((0.0..=1.0).contains(&b));
        let c_len = c.chars().count();
        let identical = bleu(&PoemPair::from_strs(&c, &[&c]).unwrap(), 4);
        if c_len >= 4 {
            prop_assert!((identical - 1.0).abs() < 1e-15);
        }
        if b == 1.0 {
            prop_assert!(c == r && c_len >= r.chars().count());
        }
    }

    #[test]
    fn bleu_non_increasing_as_brevity_penalty_bites(base in text()) {
        // Dropping characters from the candidate's end shortens c against a
        // fixed reference; with every n-gram still matched, only BP moves.
        let chars: Vec<char> = base.chars().collect();
        prop_assume!(chars.len() >= 6);
        let reference: String = chars.iter().collect();
        let mut prev = f64::INFINITY;
        for cut in (4..=chars.len()).rev() {
            let cand: String = chars[..cut].iter().collect();
            let v = bleu(&PoemPair::from_strs(&cand, &[&reference]).unwrap(), 4);
            prop_assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn losses_permutation_invariant(scores in prop::collection::vec(0.0f64..1.0, 2..40), recon in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..20)) {
        let mut rev = scores.clone();
        rev.reverse();
        let a = ScalarScoreBatch::new(scores.clone()).unwrap();
        let b = ScalarScoreBatch::new(rev).unwrap();
        prop_assert!(close(adv_discriminator_seq(&a, &a), adv_discriminator_seq(&b, &b), 1e-12));
        let pairs: Vec<ReconPair> = recon.iter().map(|&(x, y)| ReconPair::new(vec![x], vec![y]).unwrap()).collect();
        let mut back = pairs.clone();
        back.reverse();
        let c1 = cycle_loss(&pairs, &pairs).unwrap().value;
        prop_assert!(close(c1, cycle_loss(&back, &back).unwrap().value, 1e-12));
        prop_assert!(c1 >= 0.0);
        prop_assert!(supervised_loss(&pairs, &pairs).unwrap() >= 0.0);
        let exact: Vec<ReconPair> = recon.iter().map(|&(x, _)| ReconPair::new(vec![x], vec![x]).unwrap()).collect();
        prop_assert_eq!(cycle_loss(&exact, &exact).unwrap().value, 0.0);
        prop_assert_eq!(supervised_loss(&exact, &exact).unwrap(), 0.0);
        prop_assert_eq!(c1 == 0.0, recon.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn patch_losses_monotone(w in 1usize..8, h in 1usize..8, seed in any::<u64>(), entry in any::<prop::sample::Index>()) {
        let mut rng = Prng::new(seed);
        let scores: Vec<f64> = (0..w * h).map(|_| 0.05 + 0.9 * rng.next_f64()).collect();
        let grid = PatchScoreGrid::new(w, h, scores.clone()).unwrap();
        let i = entry.index(w * h);
        let mut bumped = scores;
        bumped[i] += 1e-6;
        let up = PatchScoreGrid::new(w, h, bumped).unwrap();
        let g = std::slice::from_ref(&grid);
        let u = std::slice::from_ref(&up);
        prop_assert!(patch_generator_loss(u).unwrap() < patch_generator_loss(g).unwrap());
        prop_assert!(patch_discriminator_loss(u, g).unwrap() < patch_discriminator_loss(g, g).unwrap());
        prop_assert!(patch_discriminator_loss(g, u).unwrap() > patch_discriminator_loss(g, g).unwrap());
    }

    #[test]
    fn discriminator_same_scores_peaks_at_half(s in 0.01f64..0.99) {
        let at = |v: f64| {
            let b = ScalarScoreBatch::new(vec![v; 3]).unwrap();
            adv_discriminator_seq(&b, &b)
        };
        prop_assert!(at(0.5) >= at(s));
        let b = ScalarScoreBatch::new(vec![s]).unwrap();
        prop_assert!(close(adv_discriminator_seq(&b, &b), s.ln() + (1.0 - s).ln(), 1e-15));
    }

    #[test]
    fn objective_is_linear_in_weights(k in prop::array::uniform4(-64i32..64), l in prop::array::uniform4(0i32..16)) {
        // Multiples of 1/8 keep every product and sum exact.
        let [cyc, sup, a1, a2] = k.map(|v| v as f64 / 8.0);
        let [s1, s2, t1, t2] = l.map(|v| v as f64 / 8.0);
        let f = |ls: f64, la: f64| full_objective(cyc, sup, a1, a2, LossWeights::new(ls, la).unwrap()).unwrap();
        prop_assert_eq!(f(s1 + s2, t1) - f(0.0, t1), (f(s1, t1) - f(0.0, t1)) + (f(s2, t1) - f(0.0, t1)));
        prop_assert_eq!(f(s1, t1 + t2) - f(s1, 0.0), (f(s1, t1) - f(s1, 0.0)) + (f(s1, t2) - f(s1, 0.0)));
    }

    #[test]
    fn sampling_stays_in_support(logits in prop::collection::vec(-5.0f64..5.0, 1..30), k in 1usize..40, p in 0.01f64..=1.0, t in 0.1f64..3.0, seed in any::<u64>()) {
        let v = LogitVector::new(logits).unwrap();
        let top = top_k_support(&v, k, t).unwrap();
        let nuc = nucleus_support(&v, p, t).unwrap();
        prop_assert!(!nuc.indices.is_empty());
        prop_assert!((top.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (strategy, support) in [(Decoding::TopK, &top), (Decoding::Nucleus, &nuc)] {
            let cfg = SamplingConfig { strategy, k, p, temperature: t, seed };
            let mut r1 = Prng::new(seed);
            let mut r2 = Prng::new(seed);
            for _ in 0..20 {
                let a = sample(&v, &cfg, &mut r1).unwrap();
                prop_assert!(support.indices.contains(&a));
                prop_assert_eq!(a, sample(&v, &cfg, &mut r2).unwrap());
            }
        }
    }

    #[test]
    fn pearson_symmetry_and_affine(xs in prop::collection::vec(-10.0f64..10.0, 3..50), a in 0.1f64..5.0, b in -5.0f64..5.0) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.5 + (i as f64).sin()).collect();
        let Some(r) = pearson(&xs, &ys).unwrap() else { return Ok(()); };
        prop_assert!((r - pearson(&ys, &xs).unwrap().unwrap()).abs() < 1e-12);
        let up: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let down: Vec<f64> = xs.iter().map(|x| -a * x + b).collect();
        prop_assert!((pearson(&up, &ys).unwrap().unwrap() - r).abs() < 1e-10);
        prop_assert!((pearson(&down, &ys).unwrap().unwrap() + r).abs() < 1e-10);
        prop_assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn correlation_ignores_item_order(vals in prop::collection::vec((1.0f64..5.0, 1.0f64..5.0, -3.0f64..3.0), 3..30), rot in 0usize..30) {
        let ids: Vec<String> = (0..vals.len()).map(|i| format!("i{i:03}")).collect();
        let scores: Vec<Vec<f64>> = vals.iter().map(|&(q, f, _)| vec![q, f]).collect();
        let table = RatingTable::new(ids.clone(), 3, vec!["q".into(), "f".into()], scores.clone()).unwrap();
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.rotate_left(rot % vals.len());
        let permuted = RatingTable::new(
            order.iter().map(|&i| ids[i].clone()).collect(),
            3,
            vec!["q".into(), "f".into()],
            order.iter().map(|&i| scores[i].clone()).collect(),
        ).unwrap();
        let metric = MetricSeries::new("m", ids.iter().cloned().zip(vals.iter().map(|v| v.2))).unwrap();
        let a = correlate_metrics(std::slice::from_ref(&metric), &table).unwrap();
        let b = correlate_metrics(std::slice::from_ref(&metric), &permuted).unwrap();
        prop_assert_eq!(a, b);
    }
}
