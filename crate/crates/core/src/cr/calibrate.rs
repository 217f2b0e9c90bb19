//! Platt-style probability calibration for margin classifiers.

use serde::{Deserialize, Serialize};

/// Logistic link `sigma(a*s + b)` fitted to training (score, label) pairs
/// by Newton iteration on the 2-parameter cross-entropy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlattLink {
    pub a: f64,
    pub b: f64,
}

impl PlattLink {
    pub fn fit(scores: &[f64], y: &[u8]) -> PlattLink {
        let n = scores.len();
        assert_eq!(n, y.len());
        let mut a = 1.0f64;
        let mut b = 0.0f64;
        // Slight target smoothing keeps separable data from diverging.
        let n_pos = y.iter().filter(|&&v| v == 1).count() as f64;
        let n_neg = n as f64 - n_pos;
        let t_pos = (n_pos + 1.0) / (n_pos + 2.0);
        let t_neg = 1.0 / (n_neg + 2.0);
        for _ in 0..60 {
            let mut g_a = 0.0;
            let mut g_b = 0.0;
            let mut h_aa = 1e-9;
            let mut h_ab = 0.0;
            let mut h_bb = 1e-9;
            for (&s, &label) in scores.iter().zip(y.iter()) {
                let t = if label == 1 { t_pos } else { t_neg };
                let z = a * s + b;
                let p = 1.0 / (1.0 + (-z).exp());
                let r = p - t;
                g_a += r * s;
                g_b += r;
                let w = (p * (1.0 - p)).max(1e-12);
                h_aa += w * s * s;
                h_ab += w * s;
                h_bb += w;
            }
            let det = h_aa * h_bb - h_ab * h_ab;
            if det.abs() < 1e-18 {
                break;
            }
            let da = (g_a * h_bb - g_b * h_ab) / det;
            let db = (g_b * h_aa - g_a * h_ab) / det;
            a -= da;
            b -= db;
            if da.abs().max(db.abs()) < 1e-10 {
                break;
            }
        }
        PlattLink { a, b }
    }

    pub fn prob(&self, score: f64) -> f64 {
        1.0 / (1.0 + (-(self.a * score + self.b)).exp())
    }
}
