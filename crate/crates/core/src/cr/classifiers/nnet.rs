//! One-hidden-layer perceptron (tanh hidden units, logistic output),
//! trained full-batch with momentum.

use super::{ClassifierKind, TrainedClassifier};
use crate::cr::DenseMatrix;
use crate::rng::{normal, stream};

const EPOCHS: usize = 400;
const LEARNING_RATE: f64 = 0.3;
const MOMENTUM: f64 = 0.9;
const WEIGHT_DECAY: f64 = 1e-4;

pub struct NnetClassifier {
    w1: Vec<f64>, // hidden x d
    b1: Vec<f64>,
    w2: Vec<f64>, // hidden
    b2: f64,
    hidden: usize,
    d: usize,
}

impl NnetClassifier {
    pub fn fit(x: &DenseMatrix, y: &[u8], hidden: usize, seed: u64) -> Self {
        let n = x.n_rows;
        let d = x.n_cols;
        let mut rng = stream(seed, "nnet-init", &[hidden as u64]);
        let scale1 = (1.0 / d as f64).sqrt();
        let scale2 = (1.0 / hidden as f64).sqrt();
        let mut w1: Vec<f64> = (0..hidden * d).map(|_| normal(&mut rng) * scale1).collect();
        let mut b1 = vec![0.0; hidden];
        let mut w2: Vec<f64> = (0..hidden).map(|_| normal(&mut rng) * scale2).collect();
        let mut b2 = 0.0f64;

        let mut vw1 = vec![0.0; hidden * d];
        let mut vb1 = vec![0.0; hidden];
        let mut vw2 = vec![0.0; hidden];
        let mut vb2 = 0.0f64;

        let mut h = vec![0.0; hidden];
        for _ in 0..EPOCHS {
            let mut gw1 = vec![0.0; hidden * d];
            let mut gb1 = vec![0.0; hidden];
            let mut gw2 = vec![0.0; hidden];
            let mut gb2 = 0.0f64;
            for i in 0..n {
                let xi = x.row(i);
                for j in 0..hidden {
                    let z: f64 = xi
                        .iter()
                        .zip(&w1[j * d..(j + 1) * d])
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        + b1[j];
                    h[j] = z.tanh();
                }
                let out = h.iter().zip(w2.iter()).map(|(a, b)| a * b).sum::<f64>() + b2;
                let p = 1.0 / (1.0 + (-out).exp());
                let delta = (p - f64::from(y[i])) / n as f64;
                gb2 += delta;
                for j in 0..hidden {
                    gw2[j] += delta * h[j];
                    let dh = delta * w2[j] * (1.0 - h[j] * h[j]);
                    gb1[j] += dh;
                    for (g, &v) in gw1[j * d..(j + 1) * d].iter_mut().zip(xi) {
                        *g += dh * v;
                    }
                }
            }
            for (g, w) in gw1.iter_mut().zip(w1.iter()) {
                *g += WEIGHT_DECAY * w;
            }
            for (g, w) in gw2.iter_mut().zip(w2.iter()) {
                *g += WEIGHT_DECAY * w;
            }
            for (v, g) in vw1.iter_mut().zip(gw1.iter()) {
                *v = MOMENTUM * *v - LEARNING_RATE * g;
            }
            for (v, g) in vb1.iter_mut().zip(gb1.iter()) {
                *v = MOMENTUM * *v - LEARNING_RATE * g;
            }
            for (v, g) in vw2.iter_mut().zip(gw2.iter()) {
                *v = MOMENTUM * *v - LEARNING_RATE * g;
            }
            vb2 = MOMENTUM * vb2 - LEARNING_RATE * gb2;
            for (w, v) in w1.iter_mut().zip(vw1.iter()) {
                *w += v;
            }
            for (b, v) in b1.iter_mut().zip(vb1.iter()) {
                *b += v;
            }
            for (w, v) in w2.iter_mut().zip(vw2.iter()) {
                *w += v;
            }
            b2 += vb2;
        }
        NnetClassifier {
            w1,
            b1,
            w2,
            b2,
            hidden,
            d,
        }
    }

    fn forward(&self, x: &[f64]) -> f64 {
        let mut out = self.b2;
        for j in 0..self.hidden {
            let z: f64 = x
                .iter()
                .zip(&self.w1[j * self.d..(j + 1) * self.d])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + self.b1[j];
            out += self.w2[j] * z.tanh();
        }
        out
    }
}

impl TrainedClassifier for NnetClassifier {
    fn score(&self, x: &[f64]) -> f64 {
        self.forward(x)
    }
    fn prob(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.forward(x)).exp())
    }
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Nnet
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learns_a_nonlinear_boundary() {
        // Ring data: positives inside radius 1, negatives in an annulus.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..80 {
            let angle = i as f64 * 0.0785;
            let (r, label) = if i % 2 == 0 { (0.5, 1u8) } else { (2.0, 0u8) };
            rows.push(vec![r * angle.cos(), r * angle.sin()]);
            y.push(label);
        }
        let x = DenseMatrix::from_rows(&rows);
        let model = NnetClassifier::fit(&x, &y, 8, 3);
        let correct = (0..x.n_rows)
            .filter(|&i| model.predict(x.row(i)) == y[i])
            .count();
        assert!(correct >= 76, "{correct}/80");
    }
}
