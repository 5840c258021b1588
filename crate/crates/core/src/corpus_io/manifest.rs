use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_to_string, write_string, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Painting,
    Poem,
}

impl Modality {
    pub fn other(self) -> Modality {
        match self {
            Modality::Painting => Modality::Poem,
            Modality::Poem => Modality::Painting,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Modality::Painting => "painting",
            Modality::Poem => "poem",
        })
    }
}

/// The four painting genres of the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Genre {
    Figure,
    FlowerBird,
    Landscape,
    Boundary,
}

impl Genre {
    pub const ALL: [Genre; 4] = [Genre::Figure, Genre::FlowerBird, Genre::Landscape, Genre::Boundary];

    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Figure => "figure",
            Genre::FlowerBird => "flower_bird",
            Genre::Landscape => "landscape",
            Genre::Boundary => "boundary",
        }
    }
}

impl std::str::FromStr for Genre {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Genre::ALL.into_iter().find(|g| g.as_str() == s).ok_or_else(|| Error::invalid(format!("unknown genre {s:?}")))
    }
}

/// One manifest entry. Field order is the canonical key order on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestItem {
    pub id: String,
    pub modality: Modality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genre: Option<Genre>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl ManifestItem {
    pub fn new(id: impl Into<String>, modality: Modality) -> Self {
        ManifestItem { id: id.into(), modality, pair_id: None, genre: None, split: None }
    }

    pub fn paired_with(mut self, other: impl Into<String>) -> Self {
        self.pair_id = Some(other.into());
        self
    }

    pub fn with_genre(mut self, genre: Genre) -> Self {
        self.genre = Some(genre);
        self
    }
}

/// Validated item registry: unique ids and symmetric cross-modal pairing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusManifest {
    items: Vec<ManifestItem>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    items: Vec<ManifestItem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ManifestCounts {
    pub pairs: usize,
    pub unpaired_paintings: usize,
    pub unpaired_poems: usize,
}

impl CorpusManifest {
    pub fn new(items: Vec<ManifestItem>) -> Result<Self> {
        let mut index = HashMap::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if item.id.is_empty() {
                return Err(Error::invalid(format!("item {i} has an empty id")));
            }
            if index.insert(item.id.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate id {:?}", item.id)));
            }
        }
        for item in &items {
            let Some(partner_id) = &item.pair_id else { continue };
            let partner = index
                .get(partner_id)
                .map(|&j| &items[j])
                .ok_or_else(|| Error::invalid(format!("id {:?}: pair_id {:?} does not exist", item.id, partner_id)))?;
            if partner.modality == item.modality {
                return Err(Error::invalid(format!(
                    "id {:?}: pair_id {:?} has the same modality ({})",
                    item.id, partner_id, item.modality
                )));
            }
            if partner.pair_id.as_deref() != Some(item.id.as_str()) {
                return Err(Error::invalid(format!(
                    "id {:?}: pairing with {:?} is not symmetric",
                    item.id, partner_id
                )));
            }
        }
        Ok(CorpusManifest { items, index })
    }

    pub fn items(&self) -> &[ManifestItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ManifestItem> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    pub fn counts(&self) -> ManifestCounts {
        let mut counts = ManifestCounts::default();
        for item in &self.items {
            match (&item.pair_id, item.modality) {
                (Some(_), Modality::Painting) => counts.pairs += 1,
                (Some(_), Modality::Poem) => {}
                (None, Modality::Painting) => counts.unpaired_paintings += 1,
                (None, Modality::Poem) => counts.unpaired_poems += 1,
            }
        }
        counts
    }

    /// Copy of the manifest with every item's `split` taken from `assignment`.
    pub fn with_splits(&self, assignment: &super::SplitAssignment) -> CorpusManifest {
        let mut out = self.clone();
        for item in &mut out.items {
            item.split = assignment.get(&item.id);
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ManifestFile = serde_json::from_str(text).map_err(|e| Error::parse("manifest", e))?;
        CorpusManifest::new(file.items)
    }

    /// Canonical form: two-space indented JSON, keys in declaration order,
    /// trailing LF.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusManifest> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    CorpusManifest::from_json(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn save_manifest(manifest: &CorpusManifest, path: impl AsRef<Path>) -> Result<()> {
    write_string(path.as_ref(), &manifest.to_json())
}
