//! Cohort feature matrix with CSV persistence.

use super::{feature_names, FeatureVector, FEATURE_COUNT};
use crate::error::{CoreError, Result};
use std::path::Path;

/// One row per study: 1456 features plus label and encoded TNM stage.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    /// Row-major `n_rows x FEATURE_COUNT`.
    pub data: Vec<f64>,
    pub labels: Vec<u8>,
    pub tnm: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(
        ids: Vec<String>,
        rows: Vec<FeatureVector>,
        labels: Vec<u8>,
        tnm: Vec<f64>,
    ) -> Result<Self> {
        if ids.len() != rows.len() || ids.len() != labels.len() || ids.len() != tnm.len() {
            return Err(CoreError::SizeMismatch(format!(
                "ids {}, rows {}, labels {}, tnm {}",
                ids.len(),
                rows.len(),
                labels.len(),
                tnm.len()
            )));
        }
        let mut data = Vec::with_capacity(rows.len() * FEATURE_COUNT);
        for row in &rows {
            if row.values.len() != FEATURE_COUNT {
                return Err(CoreError::FeatureMatrix(format!(
                    "row has {} features, expected {FEATURE_COUNT}",
                    row.values.len()
                )));
            }
            data.extend_from_slice(&row.values);
        }
        Ok(FeatureMatrix {
            ids,
            data,
            labels,
            tnm,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * FEATURE_COUNT..(i + 1) * FEATURE_COUNT]
    }

    /// Subset of rows, preserving order of `indices`.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * FEATURE_COUNT);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            data,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            tnm: indices.iter().map(|&i| self.tnm[i]).collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["id".to_string()];
        header.extend(feature_names().iter().cloned());
        header.push("tnm".into());
        header.push("label".into());
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut record = Vec::with_capacity(FEATURE_COUNT + 3);
            record.push(self.ids[i].clone());
            for v in self.row(i) {
                record.push(format!("{v}"));
            }
            record.push(format!("{}", self.tnm[i]));
            record.push(format!("{}", self.labels[i]));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| CoreError::io(path.display().to_string(), e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        let expect_cols = FEATURE_COUNT + 3;
        if header.len() != expect_cols {
            return Err(CoreError::FeatureMatrix(format!(
                "{} columns in {}, expected {expect_cols}",
                header.len(),
                path.display()
            )));
        }
        let names = feature_names();
        for (i, name) in names.iter().enumerate() {
            if &header[i + 1] != name.as_str() {
                return Err(CoreError::FeatureMatrix(format!(
                    "column {} is `{}`, expected `{}`",
                    i + 1,
                    &header[i + 1],
                    name
                )));
            }
        }
        let mut ids = Vec::new();
        let mut data = Vec::new();
        let mut labels = Vec::new();
        let mut tnm = Vec::new();
        for record in r.records() {
            let record = record?;
            ids.push(record[0].to_string());
            for i in 0..FEATURE_COUNT {
                let v: f64 = record[i + 1].parse().map_err(|e| {
                    CoreError::FeatureMatrix(format!("bad value `{}`: {e}", &record[i + 1]))
                })?;
                data.push(v);
            }
            tnm.push(record[FEATURE_COUNT + 1].parse().map_err(|e| {
                CoreError::FeatureMatrix(format!("bad tnm value: {e}"))
            })?);
            labels.push(record[FEATURE_COUNT + 2].parse().map_err(|e| {
                CoreError::FeatureMatrix(format!("bad label value: {e}"))
            })?);
        }
        Ok(FeatureMatrix {
            ids,
            data,
            labels,
            tnm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let rows = vec![
            FeatureVector {
                values: (0..FEATURE_COUNT).map(|i| i as f64 * 0.25).collect(),
            },
            FeatureVector {
                values: (0..FEATURE_COUNT).map(|i| (i as f64).sin()).collect(),
            },
        ];
        let m = FeatureMatrix::from_rows(
            vec!["s0".into(), "s1".into()],
            rows,
            vec![0, 1],
            vec![0.0, 1.0],
        )
        .unwrap();
        m.write_csv(&path).unwrap();
        let back = FeatureMatrix::read_csv(&path).unwrap();
        assert_eq!(back.ids, m.ids);
        assert_eq!(back.labels, m.labels);
        assert_eq!(back.tnm, m.tnm);
        assert_eq!(back.data, m.data);
    }
}
