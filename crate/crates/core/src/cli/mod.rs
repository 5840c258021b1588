//! Command-line front end: one subcommand per metric or loss family plus a
//! `summary` combiner.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 I/O failure,
//! 3 numerical failure. Every failure prints one line starting with
//! `ERROR <code>:` on standard error.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};

pub const SEED_ENV: &str = "INKBRIDGE_SEED";

#[derive(Debug, Parser)]
#[command(name = "inkbridge", version, about = "Metrics, losses and sampling for poem/painting translation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for per-item work (results do not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// TOML file with flag defaults: top-level keys apply wherever the flag
    /// exists, `[subcommand]` tables to one subcommand. Command-line flags
    /// win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct TokenProbArgs {
    /// JSON-lines token probabilities.
    #[arg(long)]
    pub token_probs: PathBuf,
    #[arg(long, default_value_t = crate::corpus_io::MAX_POEM_LEN)]
    pub max_len: usize,
    /// Cut sequences longer than --max-len instead of rejecting them.
    #[arg(long)]
    pub truncate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TextPairArgs {
    /// JSON-lines {"id","candidate","references":[...]}.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Keep full-width CJK punctuation as characters.
    #[arg(long)]
    pub keep_punctuation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Sample,
    #[value(name = "ledoit_wolf", alias = "ledoit-wolf")]
    LedoitWolf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    #[value(name = "top_k", alias = "top-k")]
    TopK,
    Nucleus,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PcaFitArg {
    Pooled,
    #[value(name = "per_domain", alias = "per-domain")]
    PerDomain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assign every manifest item to train/val/test.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.7, 0.15, 0.15])]
        ratios: Vec<f64>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Plan one epoch of paired/unpaired training batches.
    Schedule {
        #[arg(long)]
        manifest: PathBuf,
        /// Split assignment JSON from `split`.
        #[arg(long)]
        split: PathBuf,
        #[arg(long, default_value_t = 8)]
        paired_per_batch: usize,
        /// Unpaired items per paired item.
        #[arg(long, default_value_t = 5)]
        ratio_k: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Mean cross-entropy per poem, averaged over poems.
    Mce {
        #[command(flatten)]
        input: TokenProbArgs,
    },
    /// Mean cross-entropy over sampled generations, grouped by source.
    Mte {
        #[command(flatten)]
        input: TokenProbArgs,
        /// Sampling strategy that produced the generations (recorded only).
        #[arg(long, value_enum)]
        strategy: StrategyArg,
    },
    /// Perplexity: exp of the character-weighted cross-entropy.
    Ppl {
        #[command(flatten)]
        input: TokenProbArgs,
    },
    /// Character precision, recall and F1.
    Prf {
        #[command(flatten)]
        input: TextPairArgs,
    },
    /// Character-level BLEU.
    Bleu {
        #[command(flatten)]
        input: TextPairArgs,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
    /// Simplified character METEOR.
    Meteor {
        #[command(flatten)]
        input: TextPairArgs,
    },
    /// Fréchet distance between real and generated painting features.
    Fid {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        generated: PathBuf,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Sample)]
        estimator: EstimatorArg,
    },
    /// Distribution Consistency Error between painting and poem features.
    Dce {
        #[arg(long)]
        paintings: PathBuf,
        #[arg(long)]
        poems: PathBuf,
        #[arg(long, default_value_t = crate::metrics_visual::DEFAULT_DCE_PCA_DIM)]
        pca_dim: usize,
        #[arg(long, value_enum, default_value_t = EstimatorArg::LedoitWolf)]
        estimator: EstimatorArg,
        #[arg(long, value_enum, default_value_t = PcaFitArg::Pooled)]
        pca_fit: PcaFitArg,
        /// Z-score columns with pooled statistics before PCA.
        #[arg(long)]
        standardize: bool,
    },
    /// Genre classification accuracy.
    GenreAcc {
        /// CSV "id,genre" of predicted labels.
        #[arg(long)]
        pred: PathBuf,
        /// CSV "id,genre" of ground-truth labels.
        #[arg(long)]
        truth: PathBuf,
    },
    /// Component-wise training objective.
    Losses(Box<LossArgs>),
    /// Draw token indices from logit rows.
    Sample(Box<SampleArgs>),
    /// Pearson correlation of per-item metrics against human ratings.
    Correlate {
        /// CSV "id,criterion1,...".
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, default_value_t = 1)]
        raters: usize,
        /// CSV "id,metric1,..." of per-item metric values.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// JSON metric report with per-item values (repeatable).
        #[arg(long)]
        report: Vec<PathBuf>,
    },
    /// Merge metric reports into one table.
    Summary {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct LossArgs {
    /// Painting originals for the cycle term (feature CSV, one row per item).
    #[arg(long, requires = "painting_recon")]
    pub painting_orig: Option<PathBuf>,
    #[arg(long, requires = "painting_orig")]
    pub painting_recon: Option<PathBuf>,
    #[arg(long, requires = "poem_recon")]
    pub poem_orig: Option<PathBuf>,
    #[arg(long, requires = "poem_orig")]
    pub poem_recon: Option<PathBuf>,
    /// Supervised targets and predictions; the four files share row ids.
    #[arg(long, requires_all = ["sup_poem_pred", "sup_painting_target", "sup_painting_pred"])]
    pub sup_poem_target: Option<PathBuf>,
    #[arg(long, requires = "sup_poem_target")]
    pub sup_poem_pred: Option<PathBuf>,
    #[arg(long, requires = "sup_poem_target")]
    pub sup_painting_target: Option<PathBuf>,
    #[arg(long, requires = "sup_poem_target")]
    pub sup_painting_pred: Option<PathBuf>,
    /// Sequence discriminator scores on real poems (one-column feature CSV).
    #[arg(long, requires = "seq_fake")]
    pub seq_real: Option<PathBuf>,
    #[arg(long)]
    pub seq_fake: Option<PathBuf>,
    /// Flattened patch score grids (feature CSV) for real paintings.
    #[arg(long, requires = "patch_shapes")]
    pub patch_real: Option<PathBuf>,
    #[arg(long, requires = "patch_shapes")]
    pub patch_fake: Option<PathBuf>,
    /// JSON-lines {"id","w","h"} giving each grid's shape.
    #[arg(long)]
    pub patch_shapes: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_sup: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_adv: f64,
    /// Report the generator sequence term as -E[log D(fake)].
    #[arg(long)]
    pub non_saturating: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Logit rows as feature CSV.
    #[arg(long, required_unless_present = "print_config")]
    pub logits: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = crate::sampling::DEFAULT_TOP_K)]
    pub k: usize,
    #[arg(long, default_value_t = crate::sampling::DEFAULT_TEMPERATURE)]
    pub temperature: f64,
    #[arg(long, default_value_t = crate::sampling::DEFAULT_TOP_P)]
    pub p: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Draws per logit row.
    #[arg(long, default_value_t = 1)]
    pub num_samples: usize,
    /// Print the resolved sampling configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match apply_config(argv) {
        Ok(a) => a,
        Err(e) => return report_error(&e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("usage error");
            eprintln!("ERROR 1: {}", first.trim_start_matches("error: "));
            eprint!("{rendered}");
            return 1;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &Error) -> i32 {
    let code = e.exit_code();
    let message = e.to_string().replace('\n', " ");
    eprintln!("ERROR {code}: {message}");
    code
}

fn execute(cli: &Cli) -> Result<()> {
    let output = match cli.global.workers {
        Some(0) => return Err(Error::invalid("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {n} workers: {e}")))?
            .install(|| commands::dispatch(&cli.command, cli.global.format))?,
        None => commands::dispatch(&cli.command, cli.global.format)?,
    };
    emit(&output, cli.global.out.as_deref())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => crate::corpus_io::write_string(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Appends `--key value` for each config entry whose flag is absent from
/// `argv`. Top-level scalars apply to all subcommands; a table named after
/// the subcommand applies to it alone.
fn apply_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = flag_value(&argv, "--config") else {
        return Ok(argv);
    };
    let path = PathBuf::from(path);
    let text = crate::corpus_io::read_to_string(&path)?;
    let table: toml::Table = text.parse().map_err(|e| Error::parse(path.display().to_string(), e))?;
    let subcommand = argv.iter().skip(1).filter_map(|a| a.to_str()).find(|a| Cli::command_names().contains(a));
    // Top-level keys apply only where the subcommand has that flag; keys in
    // the subcommand's own table always pass through so typos surface.
    let accepted = subcommand.map(accepted_flags).unwrap_or_default();
    let mut entries: Vec<(String, toml::Value)> = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(section) => {
                if Some(key.as_str()) == subcommand {
                    entries.extend(section.iter().map(|(k, v)| (k.clone(), v.clone())));
                }
            }
            other if accepted.contains(&key.replace('_', "-")) => entries.push((key.clone(), other.clone())),
            _ => {}
        }
    }
    for (key, value) in entries {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag_present(&argv, &flag) {
            continue;
        }
        let context = || path.display().to_string();
        match value {
            toml::Value::Boolean(true) => argv.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(toml_scalar)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::parse(context(), format!("{key}: arrays may hold only scalars")))?;
                argv.push(flag.into());
                argv.push(parts.join(",").into());
            }
            other => {
                let v =
                    toml_scalar(&other).ok_or_else(|| Error::parse(context(), format!("{key}: unsupported value")))?;
                argv.push(flag.into());
                argv.push(v.into());
            }
        }
    }
    Ok(argv)
}

/// Long flag names (without dashes) of a subcommand plus the global flags.
fn accepted_flags(subcommand: &str) -> Vec<String> {
    let cli = Cli::command();
    let sub = cli.find_subcommand(subcommand).into_iter().flat_map(|c| c.get_arguments());
    cli.get_arguments().chain(sub).filter_map(|a| a.get_long()).map(str::to_owned).collect()
}

fn toml_scalar(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(crate::numeric::format_f64(*f)),
        toml::Value::Boolean(b) => Some(b.to_string()),
        _ => None,
    }
}

fn flag_present(argv: &[OsString], flag: &str) -> bool {
    let prefix = format!("{flag}=");
    argv.iter().filter_map(|a| a.to_str()).any(|a| a == flag || a.starts_with(&prefix))
}

fn flag_value(argv: &[OsString], flag: &str) -> Option<OsString> {
    let prefix = format!("{flag}=");
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_str()?;
        if s == flag {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix(&prefix) {
            return Some(rest.into());
        }
    }
    None
}

impl Cli {
    fn command_names() -> Vec<&'static str> {
        vec![
            "split",
            "schedule",
            "mce",
            "mte",
            "ppl",
            "prf",
            "bleu",
            "meteor",
            "fid",
            "dce",
            "genre-acc",
            "losses",
            "sample",
            "correlate",
            "summary",
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn command_list_matches_parser() {
        let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_owned()).collect();
        assert_eq!(names, Cli::command_names());
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_subcommand_exits_one() {
        assert_eq!(run(["inkbridge", "frobnicate"]), 1);
        assert_eq!(run(["inkbridge", "--help"]), 0);
    }

    #[test]
    fn config_fills_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "seed = 9\n[split]\nratios = [0.5, 0.25, 0.25]\n[dce]\npca_dim = 3\n").unwrap();
        let argv: Vec<OsString> =
            ["inkbridge", "split", "--config", cfg.to_str().unwrap(), "--seed", "1"].map(Into::into).to_vec();
        let out = apply_config(argv).unwrap();
        let out: Vec<&str> = out.iter().map(|a| a.to_str().unwrap()).collect();
        assert_eq!(&out[6..], ["--ratios", "0.5,0.25,0.25"]);

        let argv: Vec<OsString> = ["inkbridge", "mce", "--config", cfg.to_str().unwrap()].map(Into::into).to_vec();
        assert_eq!(apply_config(argv.clone()).unwrap(), argv);
    }
}
