use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Command, EstimatorArg, Format, LossArgs, PcaFitArg, SampleArgs, StrategyArg, TextPairArgs, TokenProbArgs};
use crate::corpus_io::{
    load_features, load_manifest, load_token_probs, read_to_string, schedule_batches, split_dataset,
    tokenize_chars_with, FeatureMatrix, SplitAssignment, TokenProbOptions, TokenProbSequence, TokenizeOptions,
};
use crate::error::{Error, Result};
use crate::linalg::Estimator;
use crate::losses::{
    adv_discriminator_seq, adv_generator_seq, adv_generator_seq_non_saturating, cycle_loss, full_objective,
    patch_discriminator_loss, patch_generator_loss, supervised_loss, LossWeights, PatchScoreGrid, ReconPair,
    ScalarScoreBatch,
};
use crate::metrics_text::{
    bleu, char_prf, cross_entropy_seq, group_sequences, mce, meteor_simplified, micro_cross_entropy, mte, perplexity,
    PoemPair,
};
use crate::metrics_visual::{dce, frechet_distance_with, genre_accuracy, DceConfig, LabelSet, PcaFitScope};
use crate::numeric::pairwise_sum;
use crate::report::{parse_reports, reports_to_csv, reports_to_json, summarize_reports, ItemValue, MetricReport};
use crate::rng::Prng;
use crate::sampling::{sample, LogitVector, SamplingConfig, Strategy};
use crate::validation::{correlate_metrics, MetricSeries, RatingTable};

pub(super) fn dispatch(command: &Command, format: Format) -> Result<String> {
    match command {
        Command::Split { manifest, ratios, seed } => {
            let ratios: [f64; 3] = ratios
                .as_slice()
                .try_into()
                .map_err(|_| Error::invalid(format!("--ratios needs 3 values, got {}", ratios.len())))?;
            let m = load_manifest(manifest)?;
            let split = in_file(manifest, split_dataset(&m, ratios, seed.seed))?;
            Ok(match format {
                Format::Json => split.to_json(),
                Format::Csv => {
                    let mut out = String::from("id,split\n");
                    for (id, s) in &split.assignment {
                        out.push_str(&format!("{id},{s}\n"));
                    }
                    out
                }
            })
        }
        Command::Schedule { manifest, split, paired_per_batch, ratio_k, seed } => {
            let m = load_manifest(manifest)?;
            let assignment = SplitAssignment::from_json(&read_to_string(split)?).map_err(|e| prefix(split, e))?;
            let plan = schedule_batches(&assignment, &m, *paired_per_batch, *ratio_k, seed.seed)?;
            Ok(match format {
                Format::Json => plan.to_json(),
                Format::Csv => {
                    let mut out = String::from("batch,partial,kind,id\n");
                    for (i, b) in plan.batches.iter().enumerate() {
                        for p in &b.paired {
                            out.push_str(&format!("{i},{},painting,{}\n", b.partial, p.painting));
                            out.push_str(&format!("{i},{},poem,{}\n", b.partial, p.poem));
                        }
                        for id in &b.unpaired {
                            out.push_str(&format!("{i},{},unpaired,{id}\n", b.partial));
                        }
                    }
                    out
                }
            })
        }
        Command::Mce { input } => {
            let corpus = token_probs(input)?;
            let report = MetricReport::new("mce", mce(&corpus)?)
                .with("sequences", corpus.len())
                .with_items(per_sequence(&corpus));
            Ok(render(&[report], format))
        }
        Command::Mte { input, strategy } => {
            let corpus = token_probs(input)?;
            let groups = in_file(&input.token_probs, group_sequences(&corpus))?;
            let report = MetricReport::new("mte", mte(&groups)?)
                .with("groups", groups.len())
                .with("sequences", corpus.len())
                .with("strategy", strategy_name(*strategy))
                .with_items(groups.par_iter().map(|g| item(g.group_id(), g.mean_cross_entropy())).collect());
            Ok(render(&[report], format))
        }
        Command::Ppl { input } => {
            let corpus = token_probs(input)?;
            let report = MetricReport::new("ppl", perplexity(&corpus)?)
                .with("cross_entropy", micro_cross_entropy(&corpus)?)
                .with("characters", corpus.iter().map(TokenProbSequence::len).sum::<usize>());
            Ok(render(&[report], format))
        }
        Command::Prf { input } => {
            let pairs = text_pairs(input)?;
            let scores: Vec<_> = pairs.par_iter().map(|(_, p)| char_prf(p)).collect();
            let build = |name: &str, pick: fn(&crate::metrics_text::Prf) -> f64| {
                let values: Vec<f64> = scores.iter().map(pick).collect();
                MetricReport::new(name, macro_mean(&values))
                    .with("pairs", pairs.len())
                    .with_items(pairs.iter().zip(&values).map(|((id, _), v)| item(id, *v)).collect())
            };
            let reports = [
                build("char_precision", |s| s.precision),
                build("char_recall", |s| s.recall),
                build("char_f1", |s| s.f1),
            ];
            Ok(render(&reports, format))
        }
        Command::Bleu { input, max_n } => {
            if *max_n == 0 {
                return Err(Error::invalid("--max-n must be at least 1"));
            }
            let pairs = text_pairs(input)?;
            let report = per_pair_report("bleu", &pairs, |p| bleu(p, *max_n)).with("max_n", *max_n);
            Ok(render(&[report], format))
        }
        Command::Meteor { input } => {
            let pairs = text_pairs(input)?;
            Ok(render(&[per_pair_report("meteor_simplified", &pairs, meteor_simplified)], format))
        }
        Command::Fid { real, generated, estimator } => {
            let (a, b) = rayon::join(|| load_features(real, None), || load_features(generated, None));
            let (a, b) = (a?, b?);
            let value = frechet_distance_with(&a, &b, estimator_of(*estimator))?;
            let report = MetricReport::new("fid", value)
                .with("estimator", estimator_of(*estimator).to_string())
                .with("n_real", a.nrows())
                .with("n_generated", b.nrows())
                .with("dim", a.ncols());
            Ok(render(&[report], format))
        }
        Command::Dce { paintings, poems, pca_dim, estimator, pca_fit, standardize } => {
            let (a, b) = rayon::join(|| load_features(paintings, None), || load_features(poems, None));
            let (a, b) = (a?, b?);
            let cfg = DceConfig {
                pca_dim: *pca_dim,
                estimator: estimator_of(*estimator),
                pca_fit_scope: match pca_fit {
                    PcaFitArg::Pooled => PcaFitScope::Pooled,
                    PcaFitArg::PerDomain => PcaFitScope::PerDomain,
                },
                standardize: *standardize,
            };
            let outcome = dce(&a, &b, &cfg)?;
            let mut report = MetricReport::new("dce", outcome.value)
                .with("pca_dim", outcome.pca_dim)
                .with("variance_retained", outcome.variance_retained)
                .with("estimator", outcome.estimator.to_string())
                .with("pca_fit", if cfg.pca_fit_scope == PcaFitScope::Pooled { "pooled" } else { "per_domain" })
                .with("standardize", cfg.standardize);
            if let Some((da, db)) = outcome.shrinkage {
                report = report.with("shrinkage_paintings", da).with("shrinkage_poems", db);
            }
            Ok(render(&[report], format))
        }
        Command::GenreAcc { pred, truth } => {
            let p = LabelSet::load(pred)?;
            let t = LabelSet::load(truth)?;
            let acc = genre_accuracy(&p, &t).map_err(|e| prefix(pred, e))?;
            Ok(render(&[MetricReport::new("genre_acc", acc).with("items", t.len())], format))
        }
        Command::Losses(args) => losses(args, format),
        Command::Sample(args) => sample_tokens(args, format),
        Command::Correlate { ratings, raters, metrics, report } => {
            let table = RatingTable::load(ratings, *raters)?;
            let mut series = Vec::new();
            if let Some(path) = metrics {
                series.extend(wide_metrics(path)?);
            }
            for path in report {
                for r in parse_reports(&read_to_string(path)?, &path.display().to_string())? {
                    if r.per_item.is_empty() {
                        return Err(prefix(
                            path,
                            Error::invalid(format!("report {} has no per-item values", r.metric)),
                        ));
                    }
                    let values = r.per_item.into_iter().map(|i| (i.id, i.value));
                    series.push(MetricSeries::new(r.metric, values).map_err(|e| prefix(path, e))?);
                }
            }
            if series.is_empty() {
                return Err(Error::invalid("correlate needs --metrics or at least one --report"));
            }
            let matrix = correlate_metrics(&series, &table)?;
            for (name, dropped) in matrix.row_names.iter().zip(&matrix.dropped) {
                if *dropped > 0 {
                    eprintln!("warning: metric {name}: {dropped} items without ratings were dropped");
                }
            }
            Ok(match format {
                Format::Json => matrix.to_json(),
                Format::Csv => matrix.to_csv(),
            })
        }
        Command::Summary { reports } => {
            let mut all = Vec::new();
            for path in reports {
                all.extend(parse_reports(&read_to_string(path)?, &path.display().to_string())?);
            }
            let table = summarize_reports(&all)?;
            Ok(match format {
                Format::Json => table.to_json(),
                Format::Csv => table.to_csv(),
            })
        }
    }
}

/// Adds the file name to validation messages that lack it.
fn prefix(path: &Path, e: Error) -> Error {
    let name = path.display().to_string();
    match e {
        Error::Validation(m) if !m.contains(&name) => Error::Validation(format!("{name}: {m}")),
        Error::Dimension(m) if !m.contains(&name) => Error::Dimension(format!("{name}: {m}")),
        other => other,
    }
}

fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| prefix(path, e))
}

fn render(reports: &[MetricReport], format: Format) -> String {
    match format {
        Format::Json => reports_to_json(reports),
        Format::Csv => reports_to_csv(reports),
    }
}

fn item(id: &str, value: f64) -> ItemValue {
    ItemValue { id: id.to_owned(), value }
}

fn macro_mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

fn strategy_name(s: StrategyArg) -> &'static str {
    match s {
        StrategyArg::TopK => "top_k",
        StrategyArg::Nucleus => "nucleus",
        StrategyArg::Greedy => "greedy",
    }
}

fn estimator_of(e: EstimatorArg) -> Estimator {
    match e {
        EstimatorArg::Sample => Estimator::Sample,
        EstimatorArg::LedoitWolf => Estimator::LedoitWolf,
    }
}

fn token_probs(input: &TokenProbArgs) -> Result<Vec<TokenProbSequence>> {
    let opts = TokenProbOptions { max_len: input.max_len, truncate: input.truncate };
    let corpus = load_token_probs(&input.token_probs, opts)?;
    if corpus.is_empty() {
        return Err(prefix(&input.token_probs, Error::invalid("no sequences")));
    }
    Ok(corpus)
}

fn per_sequence(corpus: &[TokenProbSequence]) -> Vec<ItemValue> {
    corpus.par_iter().map(|s| item(&s.id, cross_entropy_seq(s))).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TextPairRecord {
    id: String,
    candidate: String,
    references: Vec<String>,
}

/// JSON-lines `{"id","candidate","references":[...]}`, tokenized to
/// characters with whitespace and punctuation removed.
fn text_pairs(args: &TextPairArgs) -> Result<Vec<(String, PoemPair)>> {
    let path = args.pairs.as_path();
    let opts = TokenizeOptions { keep_cjk_punctuation: args.keep_punctuation };
    let text = read_to_string(path)?;
    let context = path.display().to_string();
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: TextPairRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(format!("{context}:{}", lineno + 1), e))?;
        let pair = PoemPair::new(
            tokenize_chars_with(&rec.candidate, opts),
            rec.references.iter().map(|r| tokenize_chars_with(r, opts)).collect(),
        )
        .map_err(|e| Error::invalid(format!("{context}:{}: id {:?}: {e}", lineno + 1, rec.id)))?;
        out.push((rec.id, pair));
    }
    if out.is_empty() {
        return Err(Error::invalid(format!("{context}: no text pairs")));
    }
    Ok(out)
}

fn per_pair_report(name: &str, pairs: &[(String, PoemPair)], f: impl Fn(&PoemPair) -> f64 + Sync) -> MetricReport {
    let values: Vec<f64> = pairs.par_iter().map(|(_, p)| f(p)).collect();
    MetricReport::new(name, macro_mean(&values))
        .with("pairs", pairs.len())
        .with_items(pairs.iter().zip(&values).map(|((id, _), v)| item(id, *v)).collect())
}

fn wide_metrics(path: &Path) -> Result<Vec<MetricSeries>> {
    let context = path.display().to_string();
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::parse(&context, e))?.clone();
    if header.get(0) != Some("id") || header.len() < 2 {
        return Err(Error::parse(&context, "header must be \"id,metric1,...\""));
    }
    let mut columns: Vec<Vec<(String, f64)>> = vec![Vec::new(); header.len() - 1];
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(&context, e))?;
        let id = record.get(0).unwrap_or_default().to_owned();
        for (j, cell) in record.iter().skip(1).enumerate() {
            if cell.is_empty() {
                continue;
            }
            let v =
                cell.parse::<f64>().map_err(|_| Error::parse(&context, format!("id {id:?}: bad value {cell:?}")))?;
            columns[j].push((id.clone(), v));
        }
    }
    header
        .iter()
        .skip(1)
        .zip(columns)
        .map(|(name, values)| MetricSeries::new(name, values).map_err(|e| prefix(path, e)))
        .collect()
}

/// Rows of `b` reordered to match the ids of `a`.
fn aligned_rows(
    a: &FeatureMatrix,
    b: &FeatureMatrix,
    a_path: &Path,
    b_path: &Path,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let index: BTreeMap<&str, usize> = b.ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    if a.nrows() != b.nrows() {
        return Err(Error::invalid(format!(
            "{} has {} rows but {} has {}",
            a_path.display(),
            a.nrows(),
            b_path.display(),
            b.nrows()
        )));
    }
    a.ids()
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let j = index.get(id.as_str()).ok_or_else(|| {
                Error::invalid(format!("{}: id {id:?} missing from {}", a_path.display(), b_path.display()))
            })?;
            Ok((a.row_vec(i), b.row_vec(*j)))
        })
        .collect()
}

fn recon_pairs(orig: &Path, recon: &Path) -> Result<Vec<ReconPair>> {
    let a = load_features(orig, None)?;
    let b = load_features(recon, None)?;
    aligned_rows(&a, &b, orig, recon)?
        .into_iter()
        .map(|(x, y)| ReconPair::new(x, y).map_err(|e| prefix(recon, e)))
        .collect()
}

fn score_batch(path: &Path) -> Result<ScalarScoreBatch> {
    let f = load_features(path, None)?;
    let scores: Vec<f64> = (0..f.nrows()).flat_map(|i| f.row_vec(i)).collect();
    ScalarScoreBatch::new(scores).map_err(|e| prefix(path, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeRecord {
    id: String,
    w: usize,
    h: usize,
}

fn load_shapes(path: &Path) -> Result<BTreeMap<String, (usize, usize)>> {
    let text = read_to_string(path)?;
    let context = path.display().to_string();
    let mut shapes = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ShapeRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(format!("{context}:{}", lineno + 1), e))?;
        if shapes.insert(rec.id.clone(), (rec.w, rec.h)).is_some() {
            return Err(Error::invalid(format!("{context}: duplicate shape id {:?}", rec.id)));
        }
    }
    Ok(shapes)
}

fn patch_grids(
    path: &Path,
    shapes: &BTreeMap<String, (usize, usize)>,
    shapes_path: &Path,
) -> Result<(Vec<PatchScoreGrid>, usize)> {
    let f = load_features(path, None)?;
    let mut grids = Vec::with_capacity(f.nrows());
    let mut clamped = 0;
    for (i, id) in f.ids().iter().enumerate() {
        let &(w, h) = shapes.get(id).ok_or_else(|| {
            Error::invalid(format!("{}: id {id:?} has no entry in {}", path.display(), shapes_path.display()))
        })?;
        let grid = PatchScoreGrid::new(w, h, f.row_vec(i))
            .map_err(|e| Error::invalid(format!("{}: id {id:?}: {e}", path.display())))?;
        clamped += grid.clamped();
        grids.push(grid);
    }
    Ok((grids, clamped))
}

fn losses(args: &LossArgs, format: Format) -> Result<String> {
    let weights = LossWeights::new(args.lambda_sup, args.lambda_adv)?;
    let painting = match (&args.painting_orig, &args.painting_recon) {
        (Some(o), Some(r)) => recon_pairs(o, r)?,
        _ => Vec::new(),
    };
    let poem = match (&args.poem_orig, &args.poem_recon) {
        (Some(o), Some(r)) => recon_pairs(o, r)?,
        _ => Vec::new(),
    };
    let cycle = if painting.is_empty() && poem.is_empty() { None } else { Some(cycle_loss(&painting, &poem)?) };
    if cycle.as_ref().is_some_and(|c| c.one_sided()) {
        eprintln!("warning: cycle loss computed from one side only; the missing side contributes 0");
    }

    let supervised =
        match (&args.sup_poem_target, &args.sup_poem_pred, &args.sup_painting_target, &args.sup_painting_pred) {
            (Some(pt), Some(pp), Some(gt), Some(gp)) => {
                let poems = recon_pairs(pt, pp)?;
                let paintings = recon_pairs(gt, gp)?;
                Some(supervised_loss(&poems, &paintings).map_err(|e| prefix(pt, e))?)
            }
            _ => None,
        };

    let mut clamped = 0;
    let fake_seq = args.seq_fake.as_deref().map(score_batch).transpose()?;
    let real_seq = args.seq_real.as_deref().map(score_batch).transpose()?;
    let seq_generator = fake_seq.as_ref().map(|f| {
        if args.non_saturating {
            adv_generator_seq_non_saturating(f)
        } else {
            adv_generator_seq(f)
        }
    });
    let seq_adversarial = match (&real_seq, &fake_seq) {
        (Some(r), Some(f)) => Some(adv_discriminator_seq(r, f)),
        _ => None,
    };
    clamped += real_seq.as_ref().map_or(0, ScalarScoreBatch::clamped);
    clamped += fake_seq.as_ref().map_or(0, ScalarScoreBatch::clamped);

    let shapes = args.patch_shapes.as_deref().map(load_shapes).transpose()?;
    let mut grids = |path: &Option<PathBuf>| -> Result<Option<Vec<PatchScoreGrid>>> {
        match (path, &shapes, &args.patch_shapes) {
            (Some(p), Some(s), Some(sp)) => {
                let (g, c) = patch_grids(p, s, sp)?;
                clamped += c;
                Ok(Some(g))
            }
            _ => Ok(None),
        }
    };
    let real_patch = grids(&args.patch_real)?;
    let fake_patch = grids(&args.patch_fake)?;
    let patch_generator = fake_patch.as_deref().map(patch_generator_loss).transpose()?;
    let patch_discriminator = match (&real_patch, &fake_patch) {
        (Some(r), Some(f)) => Some(patch_discriminator_loss(r, f)?),
        _ => None,
    };

    if clamped > 0 {
        eprintln!("warning: {clamped} discriminator scores clamped to [1e-7, 1 - 1e-7]");
    }
    if cycle.is_none() && supervised.is_none() && seq_adversarial.is_none() && patch_discriminator.is_none() {
        return Err(Error::invalid(
            "losses needs at least one complete term (cycle, supervised, sequence or patch adversarial inputs)",
        ));
    }
    // Both adversarial terms enter the objective as log-likelihoods:
    // E log D(real) + E log(1 - D(fake)).
    let adv_patch = patch_discriminator.map(|v| -v);
    let value = full_objective(
        cycle.as_ref().map_or(0.0, |c| c.value),
        supervised.unwrap_or(0.0),
        seq_adversarial.unwrap_or(0.0),
        adv_patch.unwrap_or(0.0),
        weights,
    )?;
    let opt = |v: Option<f64>| v.map_or(Value::Null, Value::from);
    let report = MetricReport::new("full_objective", value)
        .with("cycle", opt(cycle.as_ref().map(|c| c.value)))
        .with("cycle_painting", opt(cycle.as_ref().and_then(|c| c.painting_term)))
        .with("cycle_poem", opt(cycle.as_ref().and_then(|c| c.poem_term)))
        .with("supervised", opt(supervised))
        .with("adv_seq", opt(seq_adversarial))
        .with("adv_seq_generator", opt(seq_generator))
        .with("adv_patch", opt(adv_patch))
        .with("patch_generator", opt(patch_generator))
        .with("patch_discriminator", opt(patch_discriminator))
        .with("lambda_sup", weights.lambda_sup)
        .with("lambda_adv", weights.lambda_adv)
        .with("non_saturating", args.non_saturating)
        .with("clamped_scores", clamped);
    Ok(render(&[report], format))
}

#[derive(Serialize)]
struct SampleRecord<'a> {
    id: &'a str,
    tokens: Vec<u32>,
    seed: u64,
}

fn sample_tokens(args: &SampleArgs, format: Format) -> Result<String> {
    let strategy = match args.strategy {
        StrategyArg::TopK => Strategy::TopK,
        StrategyArg::Nucleus => Strategy::Nucleus,
        StrategyArg::Greedy => Strategy::Greedy,
    };
    let cfg = SamplingConfig { strategy, k: args.k, temperature: args.temperature, p: args.p, seed: args.seed.seed };
    cfg.validate()?;
    if args.print_config {
        let mut s = serde_json::to_string(&cfg).expect("serializable");
        s.push('\n');
        return Ok(s);
    }
    if args.num_samples == 0 {
        return Err(Error::invalid("--num-samples must be at least 1"));
    }
    let path = args.logits.as_deref().expect("clap requires --logits");
    let f = load_features(path, None)?;
    if strategy == Strategy::TopK && cfg.k > f.ncols() {
        eprintln!("warning: k = {} exceeds vocabulary size {}; using {}", cfg.k, f.ncols(), f.ncols());
    }
    // One stream across all rows, consumed in row order.
    let mut rng = Prng::new(cfg.seed);
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("id,draw,token\n");
    }
    for (i, id) in f.ids().iter().enumerate() {
        let v = LogitVector::new(f.row_vec(i)).map_err(|e| prefix(path, e))?;
        let tokens = (0..args.num_samples)
            .map(|_| sample(&v, &cfg, &mut rng).map(|t| v.token_id(t)))
            .collect::<Result<Vec<u32>>>()?;
        match format {
            Format::Json => {
                let rec = SampleRecord { id, tokens, seed: cfg.seed };
                out.push_str(&serde_json::to_string(&rec).expect("serializable"));
                out.push('\n');
            }
            Format::Csv => {
                for (draw, t) in tokens.iter().enumerate() {
                    out.push_str(&format!("{id},{draw},{t}\n"));
                }
            }
        }
    }
    Ok(out)
}
