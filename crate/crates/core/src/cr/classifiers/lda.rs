//! Linear discriminant analysis with a regularized pooled covariance.

use super::logistic::cholesky_solve;
use super::{ClassifierKind, TrainedClassifier};
use crate::cr::DenseMatrix;
use crate::error::Result;

pub struct LdaClassifier {
    w: Vec<f64>,
    b: f64,
}

impl LdaClassifier {
    pub fn fit(x: &DenseMatrix, y: &[u8], shrinkage: f64) -> Result<Self> {
        let n = x.n_rows;
        let d = x.n_cols;
        let n_pos = y.iter().filter(|&&v| v == 1).count();
        let n_neg = n - n_pos;

        let mut mu0 = vec![0.0; d];
        let mut mu1 = vec![0.0; d];
        for i in 0..n {
            let target = if y[i] == 1 { &mut mu1 } else { &mut mu0 };
            for (m, &v) in target.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for m in mu0.iter_mut() {
            *m /= n_neg as f64;
        }
        for m in mu1.iter_mut() {
            *m /= n_pos as f64;
        }

        // Pooled within-class covariance (population normalization) plus
        // diagonal shrinkage for invertibility.
        let mut cov = vec![0.0; d * d];
        for i in 0..n {
            let mu = if y[i] == 1 { &mu1 } else { &mu0 };
            let xi = x.row(i);
            for a in 0..d {
                let da = xi[a] - mu[a];
                for b in a..d {
                    cov[a * d + b] += da * (xi[b] - mu[b]);
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                cov[a * d + b] /= n as f64;
                cov[b * d + a] = cov[a * d + b];
            }
            cov[a * d + a] += shrinkage;
        }

        let diff: Vec<f64> = mu1.iter().zip(mu0.iter()).map(|(a, b)| a - b).collect();
        let w = cholesky_solve(cov, diff, d)?;
        // Decision score: w.(x - (mu0+mu1)/2) + log prior odds.
        let mid: Vec<f64> = mu0.iter().zip(mu1.iter()).map(|(a, b)| 0.5 * (a + b)).collect();
        let prior = (n_pos as f64 / n_neg as f64).ln();
        let b = prior - w.iter().zip(mid.iter()).map(|(a, b)| a * b).sum::<f64>();
        Ok(LdaClassifier { w, b })
    }

    fn discriminant(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.w.iter()).map(|(a, b)| a * b).sum::<f64>() + self.b
    }
}

impl TrainedClassifier for LdaClassifier {
    fn score(&self, x: &[f64]) -> f64 {
        self.discriminant(x)
    }
    fn prob(&self, x: &[f64]) -> f64 {
        // Gaussian equal-covariance posterior is the logistic of the
        // discriminant.
        1.0 / (1.0 + (-self.discriminant(x)).exp())
    }
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Lda
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, stream};

    #[test]
    fn boundary_matches_closed_form_midpoint() {
        // Two spherical Gaussians with equal covariance: the Bayes boundary
        // is the perpendicular bisector of the means. With many samples the
        // fitted discriminant must align with (mu1 - mu0) and cross near
        // the midpoint.
        let mut rng = stream(5, "lda", &[]);
        let n = 2000;
        let mu0 = [-1.0, 0.5];
        let mu1 = [1.0, -0.5];
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let label = u8::from(i % 2 == 0);
            let mu = if label == 1 { mu1 } else { mu0 };
            rows.push(vec![mu[0] + normal(&mut rng), mu[1] + normal(&mut rng)]);
            y.push(label);
        }
        let x = DenseMatrix::from_rows(&rows);
        let model = LdaClassifier::fit(&x, &y, 1e-3).unwrap();

        // Direction: proportional to Sigma^{-1}(mu1-mu0) = (2, -1) here.
        let ratio = model.w[0] / model.w[1];
        assert!(
            (ratio - (2.0 / -1.0)).abs() < 0.25,
            "direction ratio {ratio}"
        );
        // Midpoint of the means scores ~0 (equal priors).
        let mid = [0.0, 0.0];
        let margin = model.score(&mid).abs();
        // Normalize by the weight norm to get a distance in feature space.
        let norm = (model.w[0].powi(2) + model.w[1].powi(2)).sqrt();
        assert!(margin / norm < 0.12, "midpoint offset {}", margin / norm);
    }
}
