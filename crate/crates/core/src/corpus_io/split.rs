use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusManifest;
use crate::error::{Error, Result};
use crate::rng::Prng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

/// Deterministic train/val/test assignment of every manifest id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitAssignment {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub assignment: BTreeMap<String, Split>,
}

impl SplitAssignment {
    pub fn get(&self, id: &str) -> Option<Split> {
        self.assignment.get(id).copied()
    }

    /// Item counts in (train, val, test) order.
    pub fn counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for split in self.assignment.values() {
            counts[split.index()] += 1;
        }
        counts
    }

    pub fn ids_in(&self, split: Split) -> impl Iterator<Item = &str> {
        self.assignment.iter().filter(move |(_, &s)| s == split).map(|(id, _)| id.as_str())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("split serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("split assignment", e))
    }
}

/// Largest-remainder apportionment of `n` items: each count is the floor or
/// ceiling of `ratio * n`, and the counts sum to `n`.
fn target_counts(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts = [0usize; 3];
    for i in 0..3 {
        counts[i] = exact[i].floor() as usize;
    }
    let mut left = n.saturating_sub(counts.iter().sum());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Splits the manifest into train/val/test.
///
/// Ids are sorted, grouped into units (a pair is one unit of two, anything
/// else a unit of one), and the units are Fisher-Yates shuffled with the
/// seeded generator. Units are then dealt in order to the first split that
/// still has room for the whole unit; a pair that fits nowhere goes to the
/// split with the most room left.
pub fn split_dataset(manifest: &CorpusManifest, ratios: [f64; 3], seed: u64) -> Result<SplitAssignment> {
    if manifest.is_empty() {
        return Err(Error::invalid("cannot split an empty manifest"));
    }
    if ratios.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(Error::invalid(format!("split ratios must be positive, got {ratios:?}")));
    }
    let total: f64 = ratios.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split ratios sum to {total}, not 1")));
    }

    let mut ids: Vec<&str> = manifest.items().iter().map(|it| it.id.as_str()).collect();
    ids.sort_unstable();
    let mut units: Vec<Vec<&str>> = Vec::with_capacity(ids.len());
    for id in ids {
        match manifest.get(id).and_then(|it| it.pair_id.as_deref()) {
            Some(partner) if partner < id => {}
            Some(partner) => units.push(vec![id, partner]),
            None => units.push(vec![id]),
        }
    }

    let mut rng = Prng::new(seed);
    rng.shuffle(&mut units);

    let targets = target_counts(manifest.len(), ratios);
    let mut room = targets.map(|t| t as isize);
    let mut assignment = BTreeMap::new();
    for unit in units {
        let size = unit.len() as isize;
        let slot = (0..3)
            .find(|&s| room[s] >= size)
            .unwrap_or_else(|| (0..3).fold(0, |best, s| if room[s] > room[best] { s } else { best }));
        room[slot] -= size;
        for id in unit {
            assignment.insert(id.to_owned(), Split::ALL[slot]);
        }
    }
    Ok(SplitAssignment { seed, ratios, assignment })
}
