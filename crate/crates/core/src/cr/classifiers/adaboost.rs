//! Discrete AdaBoost over depth-1 decision stumps.

use super::{ClassifierKind, TrainedClassifier};
use crate::cr::calibrate::PlattLink;
use crate::cr::{signed_labels, DenseMatrix};
use crate::error::Result;

#[derive(Debug, Clone, Copy)]
struct Stump {
    feature: usize,
    threshold: f64,
    /// +1: predict positive above the threshold; -1: below.
    polarity: f64,
    weight: f64,
}

impl Stump {
    fn decide(&self, x: &[f64]) -> f64 {
        if (x[self.feature] - self.threshold) * self.polarity > 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Weighted best stump across all features; ties resolve to the smaller
/// feature index, then the smaller threshold.
fn best_stump(x: &DenseMatrix, ys: &[f64], w: &[f64]) -> (Stump, f64) {
    let n = x.n_rows;
    let mut best_err = f64::INFINITY;
    let mut best = Stump {
        feature: 0,
        threshold: 0.0,
        polarity: 1.0,
        weight: 0.0,
    };
    for feature in 0..x.n_cols {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            x.get(a, feature)
                .partial_cmp(&x.get(b, feature))
                .unwrap()
                .then(a.cmp(&b))
        });
        // err(+1 polarity, threshold t) = sum of w where (above & y=-1) or
        // (below & y=+1). Start with the all-above split and sweep.
        let total_pos: f64 = order
            .iter()
            .filter(|&&i| ys[i] > 0.0)
            .map(|&i| w[i])
            .sum();
        let total_neg: f64 = order
            .iter()
            .filter(|&&i| ys[i] < 0.0)
            .map(|&i| w[i])
            .sum();
        // below set empty: predicting +1 above means all predicted +1.
        let mut below_pos = 0.0;
        let mut below_neg = 0.0;
        for idx in 0..n {
            let i = order[idx];
            if ys[i] > 0.0 {
                below_pos += w[i];
            } else {
                below_neg += w[i];
            }
            if idx + 1 < n && x.get(order[idx + 1], feature) == x.get(i, feature) {
                continue;
            }
            let threshold = if idx + 1 < n {
                0.5 * (x.get(i, feature) + x.get(order[idx + 1], feature))
            } else {
                continue; // no split beyond the last value
            };
            // polarity +1: predict + above threshold.
            let err_plus = below_pos + (total_neg - below_neg);
            let err_minus = below_neg + (total_pos - below_pos);
            for (err, polarity) in [(err_plus, 1.0), (err_minus, -1.0)] {
                if err < best_err - 1e-15 {
                    best_err = err;
                    best = Stump {
                        feature,
                        threshold,
                        polarity,
                        weight: 0.0,
                    };
                }
            }
        }
    }
    (best, best_err)
}

pub struct AdaBoost {
    stumps: Vec<Stump>,
    platt: PlattLink,
}

impl AdaBoost {
    pub fn fit(x: &DenseMatrix, y: &[u8], rounds: usize) -> Result<Self> {
        let n = x.n_rows;
        let ys = signed_labels(y);
        let mut w = vec![1.0 / n as f64; n];
        let mut stumps: Vec<Stump> = Vec::new();
        for _ in 0..rounds {
            let (mut stump, err) = best_stump(x, &ys, &w);
            let err = err.clamp(1e-12, 1.0);
            if err >= 0.5 {
                break; // no weak learner left
            }
            let alpha = 0.5 * ((1.0 - err) / err).ln();
            stump.weight = alpha;
            // Reweight and renormalize.
            let mut z = 0.0;
            for i in 0..n {
                w[i] *= (-alpha * ys[i] * stump.decide(x.row(i))).exp();
                z += w[i];
            }
            for wi in w.iter_mut() {
                *wi /= z;
            }
            stumps.push(stump);
            if err < 1e-10 {
                break; // perfect stump
            }
        }
        let margins: Vec<f64> = (0..n)
            .map(|i| {
                stumps
                    .iter()
                    .map(|s| s.weight * s.decide(x.row(i)))
                    .sum::<f64>()
            })
            .collect();
        let platt = PlattLink::fit(&margins, y);
        Ok(AdaBoost { stumps, platt })
    }

    pub fn n_rounds(&self) -> usize {
        self.stumps.len()
    }

    /// Margin after each boosting round, for the staged-error property.
    pub fn staged_margins(&self, x: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        self.stumps
            .iter()
            .map(|s| {
                acc += s.weight * s.decide(x);
                acc
            })
            .collect()
    }
}

impl TrainedClassifier for AdaBoost {
    fn score(&self, x: &[f64]) -> f64 {
        self.stumps.iter().map(|s| s.weight * s.decide(x)).sum()
    }
    fn prob(&self, x: &[f64]) -> f64 {
        self.platt.prob(self.score(x))
    }
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::AdaBoost
    }
}
