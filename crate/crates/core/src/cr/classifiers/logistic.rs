//! L2-regularized logistic regression via iteratively reweighted least
//! squares (Newton steps solved by Cholesky).

use super::{ClassifierKind, TrainedClassifier};
use crate::cr::DenseMatrix;
use crate::error::{CoreError, Result};

/// Cholesky solve of `A x = b` for symmetric positive-definite `A`
/// (row-major d x d). A is consumed.
pub(crate) fn cholesky_solve(mut a: Vec<f64>, mut b: Vec<f64>, d: usize) -> Result<Vec<f64>> {
    // Factor A = L L^T in place (lower triangle).
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= a[j * d + k] * a[j * d + k];
        }
        if diag <= 0.0 {
            return Err(CoreError::InvalidParameter(
                "matrix not positive definite in Cholesky".into(),
            ));
        }
        let ljj = diag.sqrt();
        a[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut v = a[i * d + j];
            for k in 0..j {
                v -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = v / ljj;
        }
    }
    // Forward then back substitution.
    for i in 0..d {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * d + k] * b[k];
        }
        b[i] = v / a[i * d + i];
    }
    for i in (0..d).rev() {
        let mut v = b[i];
        for k in (i + 1)..d {
            v -= a[k * d + i] * b[k];
        }
        b[i] = v / a[i * d + i];
    }
    Ok(b)
}

pub struct RidgeLogistic {
    /// Weights followed by the intercept.
    w: Vec<f64>,
    b: f64,
}

impl RidgeLogistic {
    pub fn fit(x: &DenseMatrix, y: &[u8], lambda: f64) -> Result<Self> {
        let n = x.n_rows;
        let d = x.n_cols;
        let mut w = vec![0.0; d];
        let mut b = 0.0f64;
        for _ in 0..50 {
            // Gradient and Hessian of mean NLL + lambda/2 ||w||^2 over the
            // augmented parameter (w, b); intercept unpenalized.
            let da = d + 1;
            let mut grad = vec![0.0; da];
            let mut hess = vec![0.0; da * da];
            for i in 0..n {
                let xi = x.row(i);
                let z = xi.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>() + b;
                let p = 1.0 / (1.0 + (-z).exp());
                let r = p - f64::from(y[i]);
                let wgt = (p * (1.0 - p)).max(1e-10);
                for j in 0..d {
                    grad[j] += r * xi[j] / n as f64;
                    for k in j..d {
                        hess[j * da + k] += wgt * xi[j] * xi[k] / n as f64;
                    }
                    hess[j * da + d] += wgt * xi[j] / n as f64;
                }
                grad[d] += r / n as f64;
                hess[d * da + d] += wgt / n as f64;
            }
            for j in 0..d {
                grad[j] += lambda * w[j];
                hess[j * da + j] += lambda;
            }
            // Mirror the upper triangle and regularize the diagonal.
            for j in 0..da {
                hess[j * da + j] += 1e-10;
                for k in (j + 1)..da {
                    hess[k * da + j] = hess[j * da + k];
                }
            }
            let step = cholesky_solve(hess, grad.clone(), da)?;
            let mut max_step = 0.0f64;
            for j in 0..d {
                w[j] -= step[j];
                max_step = max_step.max(step[j].abs());
            }
            b -= step[d];
            max_step = max_step.max(step[d].abs());
            if max_step < 1e-9 {
                break;
            }
        }
        Ok(RidgeLogistic { w, b })
    }

    fn logit(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.w.iter()).map(|(a, b)| a * b).sum::<f64>() + self.b
    }
}

impl TrainedClassifier for RidgeLogistic {
    fn score(&self, x: &[f64]) -> f64 {
        self.logit(x)
    }
    fn prob(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.logit(x)).exp())
    }
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::L2Log
    }
}
