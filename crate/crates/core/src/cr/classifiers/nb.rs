//! Gaussian naive Bayes.

use super::{ClassifierKind, TrainedClassifier};
use crate::cr::DenseMatrix;

const VAR_FLOOR: f64 = 1e-9;

pub struct GaussianNb {
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
    log_prior: [f64; 2],
}

impl GaussianNb {
    pub fn fit(x: &DenseMatrix, y: &[u8]) -> Self {
        let d = x.n_cols;
        let mut mean = [vec![0.0; d], vec![0.0; d]];
        let mut var = [vec![0.0; d], vec![0.0; d]];
        let mut counts = [0usize; 2];
        for i in 0..x.n_rows {
            let c = y[i] as usize;
            counts[c] += 1;
            for (m, &v) in mean[c].iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for c in 0..2 {
            for m in mean[c].iter_mut() {
                *m /= counts[c] as f64;
            }
        }
        for i in 0..x.n_rows {
            let c = y[i] as usize;
            for (s, (&v, &m)) in var[c].iter_mut().zip(x.row(i).iter().zip(mean[c].iter())) {
                *s += (v - m) * (v - m);
            }
        }
        for c in 0..2 {
            for s in var[c].iter_mut() {
                *s = (*s / counts[c] as f64).max(VAR_FLOOR);
            }
        }
        let n = x.n_rows as f64;
        GaussianNb {
            mean,
            var,
            log_prior: [
                (counts[0] as f64 / n).ln(),
                (counts[1] as f64 / n).ln(),
            ],
        }
    }

    fn log_joint(&self, x: &[f64], c: usize) -> f64 {
        let mut ll = self.log_prior[c];
        for ((&v, &m), &s2) in x.iter().zip(self.mean[c].iter()).zip(self.var[c].iter()) {
            ll += -0.5 * ((v - m) * (v - m) / s2 + s2.ln() + (2.0 * std::f64::consts::PI).ln());
        }
        ll
    }
}

impl TrainedClassifier for GaussianNb {
    fn score(&self, x: &[f64]) -> f64 {
        self.log_joint(x, 1) - self.log_joint(x, 0)
    }
    fn prob(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.score(x)).exp())
    }
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Nb
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr::classifiers::lda::LdaClassifier;

    /// With mirrored within-class offsets the per-class sample covariances
    /// are exactly diagonal and equal, so NB and LDA reduce to the same
    /// linear rule and must rank test points identically.
    #[test]
    fn nb_and_lda_rank_identically_on_shared_diagonal_covariance() {
        let mu0 = [0.0, 0.0];
        let mu1 = [2.0, 1.0];
        let d1 = 0.7;
        let d2 = 0.4;
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (mu, label) in [(mu0, 0u8), (mu1, 1u8)] {
            for (ox, oy) in [(d1, 0.0), (-d1, 0.0), (0.0, d2), (0.0, -d2)] {
                rows.push(vec![mu[0] + ox, mu[1] + oy]);
                y.push(label);
            }
        }
        let x = DenseMatrix::from_rows(&rows);
        let nb = GaussianNb::fit(&x, &y);
        let lda = LdaClassifier::fit(&x, &y, 1e-3).unwrap();

        let test_points: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let t = i as f64 * 0.61;
                vec![2.0 * t.sin() + 1.0, 1.7 * (t * 1.3).cos()]
            })
            .collect();
        let mut nb_order: Vec<usize> = (0..test_points.len()).collect();
        nb_order.sort_by(|&a, &b| {
            nb.score(&test_points[a])
                .partial_cmp(&nb.score(&test_points[b]))
                .unwrap()
        });
        let mut lda_order: Vec<usize> = (0..test_points.len()).collect();
        lda_order.sort_by(|&a, &b| {
            lda.score(&test_points[a])
                .partial_cmp(&lda.score(&test_points[b]))
                .unwrap()
        });
        assert_eq!(nb_order, lda_order);
    }
}
