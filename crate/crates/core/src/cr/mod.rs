//! Feature-selection methods and classifiers with a uniform fit/predict
//! contract, plus stratified cross-validation for hyper-parameter choice.

pub mod calibrate;
pub mod classifiers;
pub mod cv;
pub mod selectors;
pub mod standardize;
pub mod tree;

pub use classifiers::{train_classifier, ClassifierKind, ClassifierParams, TrainedClassifier};
pub use cv::{
    build_fold_contexts, cross_validate, default_param_grid, grid_search, stratified_folds,
    CvOutcome, DEFAULT_K_GRID,
};
pub use selectors::{fit_select, rank_features, SelectorKind, SelectorSpec};
pub use standardize::{standardize_apply, standardize_fit, Standardizer};

use crate::error::{CoreError, Result};

/// Row-major dense matrix of feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub data: Vec<f64>,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            data: vec![0.0; n_rows * n_cols],
            n_rows,
            n_cols,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        DenseMatrix {
            data,
            n_rows,
            n_cols,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    /// Rows `rows` and columns `cols`, with an optional extra column
    /// appended (used for the clinical covariate).
    pub fn gather(&self, rows: &[usize], cols: &[usize], extra: Option<&[f64]>) -> DenseMatrix {
        let extra_cols = usize::from(extra.is_some());
        let mut out = DenseMatrix::zeros(rows.len(), cols.len() + extra_cols);
        for (oi, &ri) in rows.iter().enumerate() {
            let src = self.row(ri);
            for (oj, &cj) in cols.iter().enumerate() {
                out.set(oi, oj, src[cj]);
            }
            if let Some(e) = extra {
                out.set(oi, cols.len(), e[ri]);
            }
        }
        out
    }
}

/// Both classes must be present for any fit.
pub fn require_two_classes(y: &[u8]) -> Result<()> {
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(CoreError::SingleClass);
    }
    Ok(())
}

/// Labels as -1/+1 for margin formulations.
pub(crate) fn signed_labels(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect()
}
