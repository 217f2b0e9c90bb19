//! Soft-margin SVM trained by sequential minimal optimization on the dual.
//!
//! One solver serves both the linear and RBF machines. Index sweeps are in
//! fixed order and the second working-set element maximizes |E1 - E2| with
//! lowest-index tie-breaking, so training is deterministic.

use super::{ClassifierKind, TrainedClassifier};
use crate::cr::calibrate::PlattLink;
use crate::cr::{signed_labels, DenseMatrix};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelKind {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelKind::Linear => a.iter().zip(b.iter()).map(|(x, y)| x * y).sum(),
            KernelKind::Rbf { gamma } => {
                let dist: f64 = a
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                (-gamma * dist).exp()
            }
        }
    }
}

pub struct SvmClassifier {
    kernel: KernelKind,
    support: Vec<Vec<f64>>,
    coeffs: Vec<f64>, // alpha_i * y_i
    bias: f64,
    platt: PlattLink,
}

const TOL: f64 = 1e-3;
const EPS: f64 = 1e-8;

impl SvmClassifier {
    pub fn fit(x: &DenseMatrix, y: &[u8], c: f64, kernel: KernelKind) -> Result<Self> {
        let n = x.n_rows;
        let ys = signed_labels(y);

        // Dense kernel matrix; cohorts here are small.
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval(x.row(i), x.row(j));
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }

        let mut alpha = vec![0.0f64; n];
        let mut bias = 0.0f64;
        let f = |alpha: &[f64], bias: f64, k: &[f64], i: usize| -> f64 {
            let mut s = bias;
            for j in 0..n {
                if alpha[j] > 0.0 {
                    s += alpha[j] * ys[j] * k[j * n + i];
                }
            }
            s
        };

        let mut passes = 0;
        let max_passes = 8;
        let mut iterations = 0usize;
        let max_iterations = 400 * n;
        let mut examine_all = true;
        while passes < max_passes && iterations < max_iterations {
            let mut changed = 0usize;
            for i in 0..n {
                if !examine_all && (alpha[i] <= EPS || alpha[i] >= c - EPS) {
                    continue;
                }
                let ei = f(&alpha, bias, &k, i) - ys[i];
                let violates = (ys[i] * ei < -TOL && alpha[i] < c) || (ys[i] * ei > TOL && alpha[i] > 0.0);
                if !violates {
                    continue;
                }
                // Second choice: maximize |E_i - E_j|, lowest index wins ties.
                let mut best_j = None;
                let mut best_gap = -1.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let ej = f(&alpha, bias, &k, j) - ys[j];
                    let gap = (ei - ej).abs();
                    if gap > best_gap + 1e-15 {
                        best_gap = gap;
                        best_j = Some((j, ej));
                    }
                }
                let Some((j, ej)) = best_j else { continue };

                let (lo, hi) = if ys[i] != ys[j] {
                    ((alpha[j] - alpha[i]).max(0.0), (c + alpha[j] - alpha[i]).min(c))
                } else {
                    ((alpha[i] + alpha[j] - c).max(0.0), (alpha[i] + alpha[j]).min(c))
                };
                if (hi - lo).abs() < EPS {
                    continue;
                }
                let eta = 2.0 * k[i * n + j] - k[i * n + i] - k[j * n + j];
                if eta >= -1e-12 {
                    continue;
                }
                let mut aj_new = alpha[j] - ys[j] * (ei - ej) / eta;
                aj_new = aj_new.clamp(lo, hi);
                if (aj_new - alpha[j]).abs() < EPS {
                    continue;
                }
                let ai_new = alpha[i] + ys[i] * ys[j] * (alpha[j] - aj_new);

                // Bias update (Platt's rules).
                let b1 = bias - ei
                    - ys[i] * (ai_new - alpha[i]) * k[i * n + i]
                    - ys[j] * (aj_new - alpha[j]) * k[i * n + j];
                let b2 = bias - ej
                    - ys[i] * (ai_new - alpha[i]) * k[i * n + j]
                    - ys[j] * (aj_new - alpha[j]) * k[j * n + j];
                bias = if ai_new > EPS && ai_new < c - EPS {
                    b1
                } else if aj_new > EPS && aj_new < c - EPS {
                    b2
                } else {
                    0.5 * (b1 + b2)
                };
                alpha[i] = ai_new;
                alpha[j] = aj_new;
                changed += 1;
                iterations += 1;
            }
            if examine_all {
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
                passes += 1;
            }
        }

        // Keep only support vectors.
        let mut support = Vec::new();
        let mut coeffs = Vec::new();
        let mut margins = Vec::with_capacity(n);
        for i in 0..n {
            if alpha[i] > EPS {
                support.push(x.row(i).to_vec());
                coeffs.push(alpha[i] * ys[i]);
            }
        }
        let raw = |xi: &[f64]| -> f64 {
            let mut s = bias;
            for (sv, &co) in support.iter().zip(coeffs.iter()) {
                s += co * kernel.eval(sv, xi);
            }
            s
        };
        for i in 0..n {
            margins.push(raw(x.row(i)));
        }
        let platt = PlattLink::fit(&margins, y);
        Ok(SvmClassifier {
            kernel,
            support,
            coeffs,
            bias,
            platt,
        })
    }
}

impl TrainedClassifier for SvmClassifier {
    fn score(&self, x: &[f64]) -> f64 {
        let mut s = self.bias;
        for (sv, &co) in self.support.iter().zip(self.coeffs.iter()) {
            s += co * self.kernel.eval(sv, x);
        }
        s
    }
    fn prob(&self, x: &[f64]) -> f64 {
        self.platt.prob(self.score(x))
    }
    fn kind(&self) -> ClassifierKind {
        match self.kernel {
            KernelKind::Linear => ClassifierKind::Lsvm,
            KernelKind::Rbf { .. } => ClassifierKind::Ksvm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_svm_separates_trivial_data() {
        let rows: Vec<Vec<f64>> = vec![
            vec![-2.0, -1.0],
            vec![-1.5, -2.0],
            vec![-1.0, -1.2],
            vec![1.0, 1.5],
            vec![1.5, 1.0],
            vec![2.0, 2.0],
        ];
        let y = vec![0, 0, 0, 1, 1, 1];
        let x = DenseMatrix::from_rows(&rows);
        let model = SvmClassifier::fit(&x, &y, 10.0, KernelKind::Linear).unwrap();
        for (row, &label) in rows.iter().zip(y.iter()) {
            assert_eq!(model.predict(row), label);
        }
        // Margin signs.
        assert!(model.score(&[-2.0, -2.0]) < 0.0);
        assert!(model.score(&[2.0, 2.0]) > 0.0);
    }

    #[test]
    fn fit_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin() * 2.0, (i as f64 * 0.73).cos() * 2.0])
            .collect();
        let y: Vec<u8> = rows.iter().map(|r| u8::from(r[0] + r[1] > 0.0)).collect();
        let x = DenseMatrix::from_rows(&rows);
        let a = SvmClassifier::fit(&x, &y, 1.0, KernelKind::Rbf { gamma: 0.5 }).unwrap();
        let b = SvmClassifier::fit(&x, &y, 1.0, KernelKind::Rbf { gamma: 0.5 }).unwrap();
        for row in &rows {
            assert_eq!(a.score(row), b.score(row));
        }
    }
}
