use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest accepted poem, in characters.
pub const MAX_POEM_LEN: usize = 80;

const DIST_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenProbOptions {
    pub max_len: usize,
    /// Cut over-long sequences to `max_len` instead of rejecting them.
    pub truncate: bool,
}

impl Default for TokenProbOptions {
    fn default() -> Self {
        TokenProbOptions { max_len: MAX_POEM_LEN, truncate: false }
    }
}

/// A poem's ground-truth characters with the external language model's
/// natural-log probability of each one.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenProbSequence {
    pub id: String,
    pub group_id: Option<String>,
    pub chars: Vec<char>,
    pub logp_true: Vec<f64>,
    /// Full next-character distributions, one row per position, columns
    /// indexed by `vocab`.
    pub dist: Option<Vec<Vec<f64>>>,
    pub vocab: Option<Vec<char>>,
}

impl TokenProbSequence {
    /// Sequence without full distributions, validated against the default
    /// length cap.
    pub fn new(id: impl Into<String>, chars: Vec<char>, logp_true: Vec<f64>) -> Result<Self> {
        let seq = TokenProbSequence { id: id.into(), group_id: None, chars, logp_true, dist: None, vocab: None };
        seq.validate(MAX_POEM_LEN)?;
        Ok(seq)
    }

    pub fn with_group(mut self, group_id: impl Into<String>) -> Self {
        self.group_id = Some(group_id.into());
        self
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn validate(&self, max_len: usize) -> Result<()> {
        let id = &self.id;
        let t = self.chars.len();
        if t == 0 {
            return Err(Error::invalid(format!("id {id:?}: empty sequence")));
        }
        if t > max_len {
            return Err(Error::invalid(format!("id {id:?}: length {t} exceeds the {max_len}-character cap")));
        }
        if self.logp_true.len() != t {
            return Err(Error::invalid(format!(
                "id {id:?}: {} log-probabilities for {t} characters",
                self.logp_true.len()
            )));
        }
        for (i, &lp) in self.logp_true.iter().enumerate() {
            if !lp.is_finite() {
                return Err(Error::invalid(format!("id {id:?}: log-probability {i} is not finite")));
            }
            if lp > 0.0 {
                return Err(Error::invalid(format!("id {id:?}: log-probability {i} is {lp} > 0")));
            }
        }
        let Some(dist) = &self.dist else { return Ok(()) };
        let vocab =
            self.vocab.as_ref().ok_or_else(|| Error::invalid(format!("id {id:?}: dist given without a vocab")))?;
        if dist.len() != t {
            return Err(Error::invalid(format!("id {id:?}: {} distribution rows for {t} characters", dist.len())));
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != vocab.len() {
                return Err(Error::invalid(format!(
                    "id {id:?}: distribution row {i} has {} entries, vocab has {}",
                    row.len(),
                    vocab.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::invalid(format!("id {id:?}: distribution row {i} has entries outside [0,1]")));
            }
            let total = crate::numeric::pairwise_sum(row);
            if (total - 1.0).abs() > DIST_TOLERANCE {
                return Err(Error::invalid(format!("id {id:?}: distribution row {i} sums to {total}")));
            }
            let c = self.chars[i];
            let col = vocab
                .iter()
                .position(|&v| v == c)
                .ok_or_else(|| Error::invalid(format!("id {id:?}: character {c:?} at {i} is not in the vocab")))?;
            if (self.logp_true[i].exp() - row[col]).abs() > DIST_TOLERANCE {
                return Err(Error::invalid(format!(
                    "id {id:?}: logp at {i} disagrees with the distribution ({} vs {})",
                    self.logp_true[i].exp(),
                    row[col]
                )));
            }
        }
        Ok(())
    }

    fn truncate(&mut self, max_len: usize) {
        self.chars.truncate(max_len);
        self.logp_true.truncate(max_len);
        if let Some(dist) = &mut self.dist {
            dist.truncate(max_len);
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group_id: Option<String>,
    chars: Vec<String>,
    logp: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocab: Option<Vec<String>>,
}

fn single_char(s: &str, what: &str, id: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::invalid(format!("id {id:?}: {what} entry {s:?} is not a single character"))),
    }
}

/// Parses JSON-lines text, one object per poem. Blank lines are skipped.
pub fn parse_token_probs(text: &str, opts: TokenProbOptions, context: &str) -> Result<Vec<TokenProbSequence>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record =
            serde_json::from_str(line).map_err(|e| Error::parse(format!("{context}:{}", lineno + 1), e))?;
        let chars = rec.chars.iter().map(|s| single_char(s, "chars", &rec.id)).collect::<Result<Vec<_>>>()?;
        let vocab = rec
            .vocab
            .as_ref()
            .map(|v| v.iter().map(|s| single_char(s, "vocab", &rec.id)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let mut seq =
            TokenProbSequence { id: rec.id, group_id: rec.group_id, chars, logp_true: rec.logp, dist: rec.dist, vocab };
        if opts.truncate && seq.len() > opts.max_len {
            seq.truncate(opts.max_len);
        }
        seq.validate(opts.max_len).map_err(|e| Error::invalid(format!("{context}:{}: {e}", lineno + 1)))?;
        out.push(seq);
    }
    Ok(out)
}

pub fn load_token_probs(path: impl AsRef<Path>, opts: TokenProbOptions) -> Result<Vec<TokenProbSequence>> {
    let path = path.as_ref();
    let text = super::read_to_string(path)?;
    parse_token_probs(&text, opts, &path.display().to_string())
}
