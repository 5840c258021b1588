use std::path::Path;

use nalgebra::DMatrix;

use super::Modality;
use crate::error::{Error, Result};
use crate::numeric::format_f64;

/// `n x d` matrix of encoder outputs (or any per-item real vectors), one
/// row per id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    ids: Vec<String>,
    data: DMatrix<f64>,
    modality: Option<Modality>,
}

impl FeatureMatrix {
    pub fn new(ids: Vec<String>, data: DMatrix<f64>, modality: Option<Modality>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::invalid("feature matrix needs at least one row and one column"));
        }
        if ids.len() != data.nrows() {
            return Err(Error::Dimension(format!("{} ids for {} feature rows", ids.len(), data.nrows())));
        }
        for (i, id) in ids.iter().enumerate() {
            if data.row(i).iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("id {id:?}: non-finite feature value")));
            }
        }
        Ok(FeatureMatrix { ids, data, modality })
    }

    pub fn from_rows(ids: Vec<String>, rows: &[Vec<f64>], modality: Option<Modality>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            let id = ids.get(i).map_or("?", String::as_str);
            return Err(Error::invalid(format!("id {id:?}: ragged row")));
        }
        let data = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        FeatureMatrix::new(ids, data, modality)
    }

    /// Rows labelled `row0`, `row1`, ... for synthetic data.
    pub fn from_matrix(data: DMatrix<f64>, modality: Option<Modality>) -> Result<Self> {
        let ids = (0..data.nrows()).map(|i| format!("row{i}")).collect();
        FeatureMatrix::new(ids, data, modality)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    pub fn modality(&self) -> Option<Modality> {
        self.modality
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn row_vec(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    /// Rows reordered by id (lexicographic).
    pub fn sorted_by_id(&self) -> FeatureMatrix {
        let mut order: Vec<usize> = (0..self.nrows()).collect();
        order.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        let data = DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| self.data[(order[i], j)]);
        let ids = order.iter().map(|&i| self.ids[i].clone()).collect();
        FeatureMatrix { ids, data, modality: self.modality }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for j in 0..self.ncols() {
            out.push_str(&format!(",f{j}"));
        }
        out.push('\n');
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(&csv_field(id));
            for v in self.data.row(i).iter() {
                out.push(',');
                out.push_str(&format_f64(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, modality: Option<Modality>, context: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::parse(context, e))?.clone();
        if header.get(0).map(str::trim) != Some("id") {
            return Err(Error::parse(context, "header must start with \"id\""));
        }
        let d = header.len() - 1;
        for (j, name) in header.iter().skip(1).enumerate() {
            if name.trim() != format!("f{j}") {
                return Err(Error::parse(context, format!("header column {} is {name:?}, expected \"f{j}\"", j + 1)));
            }
        }
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::parse(context, e))?;
            let id = record.get(0).unwrap_or("").trim().to_owned();
            if record.len() != d + 1 {
                return Err(Error::invalid(format!(
                    "{context}: id {id:?}: ragged row ({} values, expected {d})",
                    record.len().saturating_sub(1)
                )));
            }
            let mut row = Vec::with_capacity(d);
            for field in record.iter().skip(1) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(context, format!("id {id:?}: {field:?} is not a number")))?;
                if !v.is_finite() {
                    return Err(Error::invalid(format!("{context}: id {id:?}: non-finite value {field:?}")));
                }
                row.push(v);
            }
            ids.push(id);
            rows.push(row);
        }
        if rows.is_empty() || d == 0 {
            return Err(Error::invalid(format!("{context}: no feature rows or columns")));
        }
        FeatureMatrix::from_rows(ids, &rows, modality).map_err(|e| Error::invalid(format!("{context}: {e}")))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Reads the `id,f0,...,f{d-1}` CSV format. Values are held as `f64`
/// whatever precision they were written with; row order is preserved.
pub fn load_features(path: impl AsRef<Path>, modality: Option<Modality>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let text = super::read_to_string(path)?;
    FeatureMatrix::from_csv(&text, modality, &path.display().to_string())
}

pub fn save_features(features: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    super::write_string(path.as_ref(), &features.to_csv())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_zero_row() {
        let m = FeatureMatrix::from_csv("id,f0,f1,f2\na,0,0,0\n", None, "t").unwrap();
        assert_eq!((m.nrows(), m.ncols()), (1, 3));
        assert!(m.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nan_names_the_row() {
        let err = FeatureMatrix::from_csv("id,f0,f1\na,1,2\nbad_row,NaN,1\n", None, "t").unwrap_err().to_string();
        assert!(err.contains("bad_row"), "{err}");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = FeatureMatrix::from_csv("id,f0,f1\na,1,2\nb,1\n", None, "t").unwrap_err();
        assert!(err.to_string().contains("\"b\""));
    }

    #[test]
    fn wide_file_keeps_row_order() {
        let d = 512;
        let mut text = String::from("id");
        for j in 0..d {
            text.push_str(&format!(",f{j}"));
        }
        text.push('\n');
        for i in 0..3 {
            text.push_str(&format!("z{i}"));
            for j in 0..d {
                text.push_str(&format!(",{}", (i * d + j) as f32 * 0.5));
            }
            text.push('\n');
        }
        let m = FeatureMatrix::from_csv(&text, Some(Modality::Painting), "t").unwrap();
        assert_eq!(m.ncols(), 512);
        assert_eq!(m.ids(), ["z0", "z1", "z2"]);
        assert_eq!(m.data()[(2, 511)], (2 * 512 + 511) as f64 * 0.5);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = FeatureMatrix::from_rows(
            vec!["a".into(), "b,c".into()],
            &[vec![0.1, -1e-300], vec![1.0 / 3.0, 2.5e10]],
            None,
        )
        .unwrap();
        let back = FeatureMatrix::from_csv(&m.to_csv(), None, "t").unwrap();
        assert_eq!(back, m);
    }
}
