//! K-nearest-neighbor voting with deterministic distance tie-breaking.

use super::{ClassifierKind, TrainedClassifier};
use crate::cr::DenseMatrix;
use crate::error::{CoreError, Result};

pub struct KnnClassifier {
    train: DenseMatrix,
    y: Vec<u8>,
    k: usize,
}

impl KnnClassifier {
    pub fn fit(x: &DenseMatrix, y: &[u8], k: usize) -> Result<Self> {
        if k == 0 || k > x.n_rows {
            return Err(CoreError::InvalidParameter(format!(
                "knn k = {k} out of range 1..={}",
                x.n_rows
            )));
        }
        Ok(KnnClassifier {
            train: x.clone(),
            y: y.to_vec(),
            k,
        })
    }

    fn positive_fraction(&self, x: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = (0..self.train.n_rows)
            .map(|i| {
                let d: f64 = self
                    .train
                    .row(i)
                    .iter()
                    .zip(x.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d, i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let pos = dist[..self.k]
            .iter()
            .filter(|&&(_, i)| self.y[i] == 1)
            .count();
        pos as f64 / self.k as f64
    }
}

impl TrainedClassifier for KnnClassifier {
    fn score(&self, x: &[f64]) -> f64 {
        self.positive_fraction(x)
    }
    fn prob(&self, x: &[f64]) -> f64 {
        self.positive_fraction(x)
    }
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Knn
    }
}
