//! Pearson correlation between computed metrics and human ratings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::corpus_io::read_to_string;
use crate::error::{Error, Result};
use crate::numeric::{format_f64, pairwise_sum};

/// Product-moment correlation, two-pass. `Ok(None)` when either side has
/// zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Option<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension(format!("pearson over {} and {} values", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("pearson needs at least 2 values"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("pearson over non-finite values"));
    }
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let dx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let dy: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let sxy = pairwise_sum(&dx.iter().zip(&dy).map(|(a, b)| a * b).collect::<Vec<_>>());
    let sxx = pairwise_sum(&dx.iter().map(|a| a * a).collect::<Vec<_>>());
    let syy = pairwise_sum(&dy.iter().map(|b| b * b).collect::<Vec<_>>());
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// Mean human ratings, one row per item and one column per criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTable {
    item_ids: Vec<String>,
    raters: usize,
    criteria: Vec<String>,
    scores: Vec<Vec<f64>>,
}

impl RatingTable {
    pub fn new(item_ids: Vec<String>, raters: usize, criteria: Vec<String>, scores: Vec<Vec<f64>>) -> Result<Self> {
        if raters == 0 {
            return Err(Error::invalid("rating table needs at least one rater"));
        }
        if criteria.is_empty() {
            return Err(Error::invalid("rating table has no criteria"));
        }
        if item_ids.len() != scores.len() {
            return Err(Error::Dimension(format!("{} ids for {} score rows", item_ids.len(), scores.len())));
        }
        let mut seen = BTreeSet::new();
        for (id, row) in item_ids.iter().zip(&scores) {
            if !seen.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate rating id {id:?}")));
            }
            if row.len() != criteria.len() {
                return Err(Error::invalid(format!(
                    "item {id:?}: {} scores for {} criteria",
                    row.len(),
                    criteria.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(1.0..=5.0).contains(*v)) {
                return Err(Error::invalid(format!("item {id:?}: score {v} outside [1, 5]")));
            }
        }
        Ok(RatingTable { item_ids, raters, criteria, scores })
    }

    /// CSV with header `id,criterion1,...`.
    pub fn from_csv(text: &str, raters: usize, context: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::parse(context, e))?.clone();
        if header.get(0) != Some("id") {
            return Err(Error::parse(context, "header must start with \"id\""));
        }
        let criteria: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut ids = Vec::new();
        let mut scores = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::parse(context, e))?;
            let id = record.get(0).unwrap_or_default().to_owned();
            let row = record
                .iter()
                .skip(1)
                .map(|cell| {
                    cell.parse::<f64>().map_err(|_| Error::parse(context, format!("item {id:?}: bad score {cell:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            ids.push(id);
            scores.push(row);
        }
        RatingTable::new(ids, raters, criteria, scores).map_err(|e| match e {
            Error::Validation(m) => Error::invalid(format!("{context}: {m}")),
            other => other,
        })
    }

    pub fn load(path: impl AsRef<Path>, raters: usize) -> Result<Self> {
        let path = path.as_ref();
        RatingTable::from_csv(&read_to_string(path)?, raters, &path.display().to_string())
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    pub fn len(&self) -> usize {
        self.item_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }

    /// Scores of one criterion keyed by item id.
    pub fn column(&self, criterion: usize) -> BTreeMap<&str, f64> {
        self.item_ids.iter().map(String::as_str).zip(self.scores.iter().map(|r| r[criterion])).collect()
    }
}

/// Per-item values of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub name: String,
    pub values: BTreeMap<String, f64>,
}

impl MetricSeries {
    pub fn new(name: impl Into<String>, values: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let name = name.into();
        let mut map = BTreeMap::new();
        for (id, v) in values {
            if !v.is_finite() {
                return Err(Error::invalid(format!("metric {name}: non-finite value for {id:?}")));
            }
            if map.insert(id.clone(), v).is_some() {
                return Err(Error::invalid(format!("metric {name}: duplicate id {id:?}")));
            }
        }
        Ok(MetricSeries { name, values: map })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    /// `None` marks an undefined cell (zero variance).
    pub values: Vec<Vec<Option<f64>>>,
    /// Items used per metric row after id alignment.
    pub aligned: Vec<usize>,
    /// Metric items without a rating, per row.
    pub dropped: Vec<usize>,
}

impl CorrelationMatrix {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// `metric,criterion1,...`; undefined cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for c in &self.col_names {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (name, row) in self.row_names.iter().zip(&self.values) {
            out.push_str(name);
            for v in row {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&format_f64(*v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Pearson of every metric against every criterion over the items both
/// share. Metric items missing from the ratings are dropped and counted.
pub fn correlate_metrics(metrics: &[MetricSeries], ratings: &RatingTable) -> Result<CorrelationMatrix> {
    let columns: Vec<BTreeMap<&str, f64>> = (0..ratings.criteria.len()).map(|c| ratings.column(c)).collect();
    let mut values = Vec::with_capacity(metrics.len());
    let mut aligned = Vec::with_capacity(metrics.len());
    let mut dropped = Vec::with_capacity(metrics.len());
    for metric in metrics {
        // BTreeMap iteration gives id order, so input ordering is irrelevant.
        let shared: Vec<(&str, f64)> = metric
            .values
            .iter()
            .filter(|(id, _)| columns[0].contains_key(id.as_str()))
            .map(|(id, v)| (id.as_str(), *v))
            .collect();
        if shared.len() < 2 {
            return Err(Error::invalid(format!(
                "metric {}: only {} items overlap the ratings",
                metric.name,
                shared.len()
            )));
        }
        let xs: Vec<f64> = shared.iter().map(|(_, v)| *v).collect();
        let row = columns
            .iter()
            .map(|col| {
                let ys: Vec<f64> = shared.iter().map(|(id, _)| col[id]).collect();
                pearson(&xs, &ys)
            })
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
        aligned.push(shared.len());
        dropped.push(metric.values.len() - shared.len());
    }
    Ok(CorrelationMatrix {
        row_names: metrics.iter().map(|m| m.name.clone()).collect(),
        col_names: ratings.criteria.clone(),
        values,
        aligned,
        dropped,
    })
}
