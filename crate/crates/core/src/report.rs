//! Machine-readable metric reports and the summary table that merges them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::numeric::format_f64;

/// Summary table columns, in the order the poem and painting result tables
/// use, with the report metric name that fills each one.
pub const SUMMARY_COLUMNS: [(&str, &str); 11] = [
    ("P", "char_precision"),
    ("R", "char_recall"),
    ("F1", "char_f1"),
    ("BLEU", "bleu"),
    ("METEOR", "meteor_simplified"),
    ("PPL", "ppl"),
    ("MCE", "mce"),
    ("MTE", "mte"),
    ("P-FID", "fid"),
    ("P-Acc", "genre_acc"),
    ("DCE", "dce"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemValue {
    pub id: String,
    pub value: f64,
}

/// One metric value plus whatever the computation wants to surface
/// alongside it. Extras keep insertion order in the JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub value: f64,
    #[serde(flatten)]
    pub extras: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_item: Vec<ItemValue>,
}

impl MetricReport {
    pub fn new(metric: impl Into<String>, value: f64) -> Self {
        MetricReport { metric: metric.into(), value, extras: Map::new(), per_item: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.extras.insert(key.to_owned(), value.into());
        self
    }

    pub fn with_items(mut self, items: Vec<ItemValue>) -> Self {
        self.per_item = items;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(context, e))
    }

    /// Header `metric,value,<scalar extras>` and one row. Per-item values,
    /// when present, follow as `id,value` rows after a blank line.
    pub fn to_csv(&self) -> String {
        let scalars: Vec<(&String, String)> =
            self.extras.iter().filter_map(|(k, v)| scalar_cell(v).map(|c| (k, c))).collect();
        let mut out = String::from("metric,value");
        for (k, _) in &scalars {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        out.push_str(&self.metric);
        out.push(',');
        out.push_str(&format_f64(self.value));
        for (_, cell) in &scalars {
            out.push(',');
            out.push_str(cell);
        }
        out.push('\n');
        if !self.per_item.is_empty() {
            out.push_str("\nid,value\n");
            for item in &self.per_item {
                out.push_str(&item.id);
                out.push(',');
                out.push_str(&format_f64(item.value));
                out.push('\n');
            }
        }
        out
    }
}

/// Several reports as one CSV table: the header comes from the first
/// report's scalar extras, and per-item sections are omitted.
pub fn reports_to_csv(reports: &[MetricReport]) -> String {
    let Some(first) = reports.first() else {
        return String::from("metric,value\n");
    };
    if reports.len() == 1 {
        return first.to_csv();
    }
    let keys: Vec<&String> = first.extras.iter().filter(|(_, v)| scalar_cell(v).is_some()).map(|(k, _)| k).collect();
    let mut out = String::from("metric,value");
    for k in &keys {
        out.push(',');
        out.push_str(k);
    }
    out.push('\n');
    for r in reports {
        out.push_str(&r.metric);
        out.push(',');
        out.push_str(&format_f64(r.value));
        for k in &keys {
            out.push(',');
            out.push_str(&r.extras.get(k.as_str()).and_then(scalar_cell).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

pub fn reports_to_json(reports: &[MetricReport]) -> String {
    if reports.len() == 1 {
        return reports[0].to_json();
    }
    let mut s = serde_json::to_string_pretty(reports).expect("serializable");
    s.push('\n');
    s
}

/// Reads reports back from JSON (one object or an array) or from CSV
/// (`metric,value,...` rows up to the first blank line).
pub fn parse_reports(text: &str, context: &str) -> Result<Vec<MetricReport>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return Ok(vec![MetricReport::from_json(text, context)?]);
    }
    if trimmed.starts_with('[') {
        return serde_json::from_str(text).map_err(|e| Error::parse(context, e));
    }
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    if header.len() < 2 || header[0] != "metric" || header[1] != "value" {
        return Err(Error::parse(context, "expected a metric,value report"));
    }
    let mut reports = Vec::new();
    for line in lines.take_while(|l| !l.trim().is_empty()) {
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != header.len() {
            return Err(Error::parse(context, format!("row {line:?} does not match the header")));
        }
        let value = row[1].parse::<f64>().map_err(|_| Error::parse(context, format!("bad value {:?}", row[1])))?;
        reports.push(MetricReport::new(row[0], value));
    }
    if reports.is_empty() {
        return Err(Error::parse(context, "report has no rows"));
    }
    Ok(reports)
}

fn scalar_cell(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(f) if n.is_f64() => format_f64(f),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// One-row table keyed by summary column, in fixed column order. Metrics
/// outside the standard set are appended in name order.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub columns: Vec<(String, f64)>,
}

impl SummaryTable {
    pub fn to_json(&self) -> String {
        let map: Map<String, Value> = self.columns.iter().map(|(k, v)| (k.clone(), Value::from(*v))).collect();
        let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let header: Vec<&str> = self.columns.iter().map(|(k, _)| k.as_str()).collect();
        let row: Vec<String> = self.columns.iter().map(|(_, v)| format_f64(*v)).collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    }
}

pub fn summarize_reports(reports: &[MetricReport]) -> Result<SummaryTable> {
    if reports.is_empty() {
        return Err(Error::invalid("summary needs at least one report"));
    }
    let mut by_name: BTreeMap<&str, f64> = BTreeMap::new();
    for r in reports {
        match by_name.get(r.metric.as_str()) {
            Some(v) if v.to_bits() != r.value.to_bits() => {
                return Err(Error::invalid(format!(
                    "conflicting values for metric {}: {} and {}",
                    r.metric,
                    format_f64(*v),
                    format_f64(r.value)
                )));
            }
            _ => {
                by_name.insert(&r.metric, r.value);
            }
        }
    }
    let mut columns = Vec::new();
    for (column, metric) in SUMMARY_COLUMNS {
        if let Some(v) = by_name.remove(metric) {
            columns.push((column.to_owned(), v));
        }
    }
    columns.extend(by_name.into_iter().map(|(k, v)| (k.to_owned(), v)));
    Ok(SummaryTable { columns })
}
