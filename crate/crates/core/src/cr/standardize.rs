//! Per-feature z-scoring with training statistics.

use super::DenseMatrix;
use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Sample standard deviation (n-1); zero-variance features keep sd = 0
    /// and map to 0 on apply.
    pub sd: Vec<f64>,
}

pub fn standardize_fit(x: &DenseMatrix) -> Result<Standardizer> {
    if x.n_rows < 2 {
        return Err(CoreError::InvalidParameter(
            "standardize_fit needs at least 2 rows".into(),
        ));
    }
    let n = x.n_rows as f64;
    let mut mean = vec![0.0; x.n_cols];
    for i in 0..x.n_rows {
        for (m, &v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut sd = vec![0.0; x.n_cols];
    for i in 0..x.n_rows {
        for (s, (&v, &m)) in sd.iter_mut().zip(x.row(i).iter().zip(mean.iter())) {
            *s += (v - m) * (v - m);
        }
    }
    for s in sd.iter_mut() {
        *s = (*s / (n - 1.0)).sqrt();
    }
    Ok(Standardizer { mean, sd })
}

pub fn standardize_apply(stats: &Standardizer, x: &DenseMatrix) -> DenseMatrix {
    assert_eq!(stats.mean.len(), x.n_cols, "standardizer dimensionality");
    let mut out = x.clone();
    for i in 0..out.n_rows {
        let base = i * out.n_cols;
        for j in 0..out.n_cols {
            let v = out.data[base + j];
            out.data[base + j] = if stats.sd[j] > 0.0 {
                (v - stats.mean[j]) / stats.sd[j]
            } else {
                0.0
            };
        }
    }
    out
}

/// Fit/apply for a single column (the clinical covariate).
pub fn standardize_column(train: &[f64]) -> (f64, f64) {
    let n = train.len() as f64;
    let mean = train.iter().sum::<f64>() / n;
    let var = train.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

pub fn apply_column(stats: (f64, f64), values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if stats.1 > 0.0 { (v - stats.0) / stats.1 } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_column() {
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![3.0]]);
        let stats = standardize_fit(&x).unwrap();
        assert_eq!(stats.mean, vec![2.0]);
        assert!((stats.sd[0] - std::f64::consts::SQRT_2).abs() < 1e-12);
        let z = standardize_apply(&stats, &x);
        assert!((z.get(0, 0) + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((z.get(1, 0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let x = DenseMatrix::from_rows(&[vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0]]);
        let stats = standardize_fit(&x).unwrap();
        let z = standardize_apply(&stats, &x);
        for i in 0..3 {
            assert_eq!(z.get(i, 0), 0.0);
        }
    }

    #[test]
    fn training_set_becomes_zero_mean_unit_sd() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64).sin() * 3.0 + 1.0, i as f64 * 0.5 - 4.0])
            .collect();
        let x = DenseMatrix::from_rows(&rows);
        let stats = standardize_fit(&x).unwrap();
        let z = standardize_apply(&stats, &x);
        for j in 0..2 {
            let col = z.column(j);
            let mean: f64 = col.iter().sum::<f64>() / col.len() as f64;
            let var: f64 =
                col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (col.len() - 1) as f64;
            assert!(mean.abs() < 1e-9);
            assert!((var - 1.0).abs() < 1e-9);
        }
    }
}
