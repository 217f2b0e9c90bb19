//! The six feature-selection methods.
//!
//! L1-LOG, EN-LOG and L1-SVM rank by entry order on a coordinate-descent
//! regularization path; RF ranks by mean impurity decrease; DC by distance
//! correlation with the outcome; SIS by absolute marginal Pearson
//! correlation. Every ranking is deterministic given (data, spec, seed).

use super::tree::{ForestConfig, Mtry, RandomForest};
use super::{require_two_classes, signed_labels, DenseMatrix};
use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectorKind {
    #[serde(rename = "L1-LOG")]
    L1Log,
    #[serde(rename = "L1-SVM")]
    L1Svm,
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "DC")]
    Dc,
    #[serde(rename = "EN-LOG")]
    EnLog,
    #[serde(rename = "SIS")]
    Sis,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 6] = [
        SelectorKind::L1Log,
        SelectorKind::L1Svm,
        SelectorKind::Rf,
        SelectorKind::Dc,
        SelectorKind::EnLog,
        SelectorKind::Sis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectorKind::L1Log => "L1-LOG",
            SelectorKind::L1Svm => "L1-SVM",
            SelectorKind::Rf => "RF",
            SelectorKind::Dc => "DC",
            SelectorKind::EnLog => "EN-LOG",
            SelectorKind::Sis => "SIS",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectorSpec {
    pub kind: SelectorKind,
    /// Number of features to keep.
    pub k: usize,
    /// Regularization path length for the sparse methods.
    pub path_len: usize,
    /// Smallest path lambda as a fraction of lambda_max.
    pub lambda_min_ratio: f64,
    /// Elastic-net L1 mix (EN-LOG only).
    pub en_alpha: f64,
    /// Forest size (RF only).
    pub n_trees: usize,
}

impl Default for SelectorSpec {
    fn default() -> Self {
        SelectorSpec {
            kind: SelectorKind::Sis,
            k: 32,
            path_len: 30,
            lambda_min_ratio: 0.01,
            en_alpha: 0.5,
            n_trees: 200,
        }
    }
}

impl SelectorSpec {
    pub fn new(kind: SelectorKind, k: usize) -> Self {
        SelectorSpec {
            kind,
            k,
            ..Default::default()
        }
    }
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Penalized objective family solved by coordinate descent.
enum PathLoss {
    Logistic { en_alpha: f64 },
    SquaredHinge,
}

/// Coordinate-wise proximal descent over a descending lambda path with warm
/// starts. Returns per-feature (first entry index on the path, mean |coef|).
fn cd_path(
    x: &DenseMatrix,
    y: &[u8],
    loss: PathLoss,
    path_len: usize,
    lambda_min_ratio: f64,
) -> (Vec<usize>, Vec<f64>) {
    let n = x.n_rows;
    let d = x.n_cols;
    let ys = signed_labels(y);
    let nf = n as f64;

    // Lipschitz bound per coordinate: 0.25 (logistic) or 2 (squared hinge)
    // times mean(x_j^2).
    let curvature = match loss {
        PathLoss::Logistic { .. } => 0.25,
        PathLoss::SquaredHinge => 2.0,
    };
    let mut col_sq = vec![0.0; d];
    for i in 0..n {
        for (j, &v) in x.row(i).iter().enumerate() {
            col_sq[j] += v * v;
        }
    }
    let lipschitz: Vec<f64> = col_sq.iter().map(|&s| (curvature * s / nf).max(1e-12)).collect();

    // lambda_max: smallest lambda with all-zero coefficients, from the
    // gradient at w = 0 (intercept at the base rate).
    let pos_rate = y.iter().filter(|&&v| v == 1).count() as f64 / nf;
    let grad0: Vec<f64> = match loss {
        PathLoss::Logistic { .. } => {
            // d/dw_j mean log(1+exp(-ys f)) at f = logit(base): residual is
            // (p - y) with p = pos_rate.
            (0..d)
                .map(|j| {
                    let mut g = 0.0;
                    for i in 0..n {
                        g += (pos_rate - f64::from(y[i])) * x.get(i, j);
                    }
                    (g / nf).abs()
                })
                .collect()
        }
        PathLoss::SquaredHinge => {
            let b0 = 2.0 * pos_rate - 1.0;
            (0..d)
                .map(|j| {
                    let mut g = 0.0;
                    for i in 0..n {
                        let margin = ys[i] * b0;
                        if margin < 1.0 {
                            g += -2.0 * ys[i] * (1.0 - margin) * x.get(i, j);
                        }
                    }
                    (g / nf).abs()
                })
                .collect()
        }
    };
    let lambda_max = grad0.iter().copied().fold(1e-12, f64::max);

    let lambdas: Vec<f64> = (0..path_len)
        .map(|t| {
            let frac = t as f64 / (path_len - 1).max(1) as f64;
            lambda_max * lambda_min_ratio.powf(frac)
        })
        .collect();

    let mut w = vec![0.0; d];
    let b0 = match loss {
        PathLoss::Logistic { .. } => (pos_rate / (1.0 - pos_rate)).ln(),
        PathLoss::SquaredHinge => 2.0 * pos_rate - 1.0,
    };
    // The intercept lives implicitly inside f (every update shifts all f_i).
    let mut f: Vec<f64> = vec![b0; n];

    let mut first_entry = vec![usize::MAX; d];
    let mut coef_sum = vec![0.0; d];

    for (t, &lambda) in lambdas.iter().enumerate() {
        for _sweep in 0..50 {
            let mut max_delta = 0.0f64;
            // Intercept (unpenalized) first.
            let gb = match loss {
                PathLoss::Logistic { .. } => {
                    let mut g = 0.0;
                    for i in 0..n {
                        let p = 1.0 / (1.0 + (-f[i]).exp());
                        g += p - f64::from(y[i]);
                    }
                    g / nf
                }
                PathLoss::SquaredHinge => {
                    let mut g = 0.0;
                    for i in 0..n {
                        let margin = ys[i] * f[i];
                        if margin < 1.0 {
                            g += -2.0 * ys[i] * (1.0 - margin);
                        }
                    }
                    g / nf
                }
            };
            let lb = match loss {
                PathLoss::Logistic { .. } => 0.25,
                PathLoss::SquaredHinge => 2.0,
            };
            let db = -gb / lb;
            if db.abs() > 1e-12 {
                for fi in f.iter_mut() {
                    *fi += db;
                }
                max_delta = max_delta.max(db.abs());
            }

            for j in 0..d {
                let gj = match loss {
                    PathLoss::Logistic { .. } => {
                        let mut g = 0.0;
                        for i in 0..n {
                            let p = 1.0 / (1.0 + (-f[i]).exp());
                            g += (p - f64::from(y[i])) * x.get(i, j);
                        }
                        g / nf
                    }
                    PathLoss::SquaredHinge => {
                        let mut g = 0.0;
                        for i in 0..n {
                            let margin = ys[i] * f[i];
                            if margin < 1.0 {
                                g += -2.0 * ys[i] * (1.0 - margin) * x.get(i, j);
                            }
                        }
                        g / nf
                    }
                };
                let (l1, l2) = match loss {
                    PathLoss::Logistic { en_alpha } => (lambda * en_alpha, lambda * (1.0 - en_alpha)),
                    PathLoss::SquaredHinge => (lambda, 0.0),
                };
                let lj = lipschitz[j];
                let old = w[j];
                let new = soft_threshold(old - gj / lj, l1 / lj) / (1.0 + l2 / lj);
                let delta = new - old;
                if delta != 0.0 {
                    w[j] = new;
                    for i in 0..n {
                        f[i] += delta * x.get(i, j);
                    }
                    max_delta = max_delta.max(delta.abs());
                }
            }
            if max_delta < 1e-6 {
                break;
            }
        }
        for j in 0..d {
            if w[j].abs() > 1e-10 {
                if first_entry[j] == usize::MAX {
                    first_entry[j] = t;
                }
                coef_sum[j] += w[j].abs();
            }
        }
    }
    let mean_coef: Vec<f64> = coef_sum.iter().map(|&s| s / path_len as f64).collect();
    (first_entry, mean_coef)
}

/// Distance correlation between a feature column and the labels.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    assert_eq!(n, y.len());
    let nf = n as f64;

    let center = |v: &[f64]| -> (Vec<f64>, f64) {
        // Returns the double-centered distance matrix (flattened) and its
        // mean square (dVar).
        let mut dist = vec![0.0; n * n];
        let mut row_mean = vec![0.0; n];
        let mut grand = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = (v[i] - v[j]).abs();
                dist[i * n + j] = d;
                row_mean[i] += d;
            }
        }
        for rm in row_mean.iter_mut() {
            *rm /= nf;
            grand += *rm;
        }
        grand /= nf;
        let mut dvar = 0.0;
        for i in 0..n {
            for j in 0..n {
                let c = dist[i * n + j] - row_mean[i] - row_mean[j] + grand;
                dist[i * n + j] = c;
                dvar += c * c;
            }
        }
        (dist, dvar / (nf * nf))
    };

    let (a, var_a) = center(x);
    let (b, var_b) = center(y);
    if var_a <= 0.0 || var_b <= 0.0 {
        return 0.0;
    }
    let mut cov = 0.0;
    for (av, bv) in a.iter().zip(b.iter()) {
        cov += av * bv;
    }
    cov /= nf * nf;
    (cov.max(0.0) / (var_a * var_b).sqrt()).sqrt()
}

fn pearson_abs(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&a, &b) in x.iter().zip(y.iter()) {
        num += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx <= 0.0 || vy <= 0.0 {
        0.0
    } else {
        (num / (vx * vy).sqrt()).abs()
    }
}

/// Full best-first feature ranking.
pub fn rank_features(
    x: &DenseMatrix,
    y: &[u8],
    spec: &SelectorSpec,
    seed: u64,
) -> Result<Vec<usize>> {
    require_two_classes(y)?;
    if x.n_rows != y.len() {
        return Err(CoreError::SizeMismatch(format!(
            "{} rows vs {} labels",
            x.n_rows,
            y.len()
        )));
    }
    let d = x.n_cols;
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();

    // Higher score = more important; ties broken by feature index.
    let rank_by_score = |scores: Vec<f64>| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        idx
    };

    Ok(match spec.kind {
        SelectorKind::Sis => {
            let scores: Vec<f64> = (0..d).map(|j| pearson_abs(&x.column(j), &yf)).collect();
            rank_by_score(scores)
        }
        SelectorKind::Dc => {
            use rayon::prelude::*;
            let scores: Vec<f64> = (0..d)
                .into_par_iter()
                .map(|j| distance_correlation(&x.column(j), &yf))
                .collect();
            rank_by_score(scores)
        }
        SelectorKind::Rf => {
            let forest = RandomForest::fit(
                x,
                y,
                &ForestConfig {
                    n_trees: spec.n_trees,
                    mtry: Mtry::Sqrt,
                    min_samples_split: 2,
                },
                seed,
            );
            rank_by_score(forest.importance.clone())
        }
        SelectorKind::L1Log | SelectorKind::EnLog | SelectorKind::L1Svm => {
            let loss = match spec.kind {
                SelectorKind::L1Log => PathLoss::Logistic { en_alpha: 1.0 },
                SelectorKind::EnLog => PathLoss::Logistic {
                    en_alpha: spec.en_alpha,
                },
                _ => PathLoss::SquaredHinge,
            };
            let (first_entry, mean_coef) = cd_path(x, y, loss, spec.path_len, spec.lambda_min_ratio);
            let mut idx: Vec<usize> = (0..d).collect();
            idx.sort_by(|&a, &b| {
                first_entry[a]
                    .cmp(&first_entry[b])
                    .then(mean_coef[b].partial_cmp(&mean_coef[a]).unwrap())
                    .then(a.cmp(&b))
            });
            idx
        }
    })
}

/// Ranking plus the top-k subset (in rank order).
pub fn fit_select(
    x: &DenseMatrix,
    y: &[u8],
    spec: &SelectorSpec,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.k == 0 || spec.k > x.n_cols {
        return Err(CoreError::InvalidParameter(format!(
            "k = {} out of range 1..={}",
            spec.k, x.n_cols
        )));
    }
    let ranking = rank_features(x, y, spec, seed)?;
    let top_k = ranking[..spec.k].to_vec();
    Ok((ranking, top_k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, stream};

    /// y equals the sign of column 0; remaining columns are noise.
    fn planted(n: usize, d: usize, seed: u64) -> (DenseMatrix, Vec<u8>) {
        let mut rng = stream(seed, "selector-test", &[]);
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let label = u8::from(rand::Rng::random::<f64>(&mut rng) < 0.5);
            let mut row: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
            row[0] = f64::from(label) * 2.0 - 1.0;
            rows.push(row);
            y.push(label);
        }
        (DenseMatrix::from_rows(&rows), y)
    }

    #[test]
    fn every_method_finds_the_planted_feature() {
        let (x, y) = planted(200, 12, 31);
        for kind in SelectorKind::ALL {
            let spec = SelectorSpec::new(kind, 3);
            let (ranking, top) = fit_select(&x, &y, &spec, 5).unwrap();
            assert_eq!(ranking[0], 0, "{kind:?} must rank the signal first");
            assert_eq!(top[0], 0);
            assert_eq!(ranking.len(), 12);
        }
    }

    #[test]
    fn dcor_identities() {
        let mut rng = stream(3, "dcor", &[]);
        let x: Vec<f64> = (0..60).map(|_| normal(&mut rng)).collect();
        assert!((distance_correlation(&x, &x) - 1.0).abs() < 1e-12);
        // Invariance under positive affine rescaling.
        let x2: Vec<f64> = x.iter().map(|v| 3.5 * v + 2.0).collect();
        let y: Vec<f64> = (0..60).map(|_| normal(&mut rng)).collect();
        let a = distance_correlation(&x, &y);
        let b = distance_correlation(&x2, &y);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn dcor_null_is_small() {
        let mut rng = stream(17, "dcor-null", &[]);
        let x: Vec<f64> = (0..500).map(|_| normal(&mut rng)).collect();
        let y: Vec<f64> = (0..500)
            .map(|_| f64::from(rand::Rng::random::<f64>(&mut rng) < 0.5))
            .collect();
        let d = distance_correlation(&x, &y);
        assert!(d < 0.15, "independent columns should have dcor < 0.15, got {d}");
    }

    #[test]
    fn single_class_rejected() {
        let (x, _) = planted(20, 4, 9);
        let y = vec![1u8; 20];
        assert!(rank_features(&x, &y, &SelectorSpec::new(SelectorKind::Sis, 2), 0).is_err());
    }

    /// Every feature carries signal at a distinct strength so rankings
    /// have no ties (pure-noise features would all tie at "never entered"
    /// on the path, where index tie-breaking is not equivariant).
    fn graded_signal(n: usize, seed: u64) -> (DenseMatrix, Vec<u8>) {
        let strengths = [1.0, 0.75, 0.55, 0.4, 0.3, 0.2];
        let mut rng = stream(seed, "graded", &[]);
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let label = u8::from(rand::Rng::random::<f64>(&mut rng) < 0.5);
            let s = f64::from(label) * 2.0 - 1.0;
            let row: Vec<f64> = strengths
                .iter()
                .map(|&w| s * w + 0.4 * normal(&mut rng))
                .collect();
            rows.push(row);
            y.push(label);
        }
        (DenseMatrix::from_rows(&rows), y)
    }

    #[test]
    fn ranking_is_permutation_equivariant() {
        // Permute columns; the ranking must permute identically. Holds
        // exactly for the deterministic per-column and path methods.
        let (x, y) = graded_signal(120, 77);
        let perm = [3usize, 0, 4, 1, 5, 2];
        let mut permuted = DenseMatrix::zeros(x.n_rows, x.n_cols);
        for i in 0..x.n_rows {
            for (new_j, &old_j) in perm.iter().enumerate() {
                permuted.set(i, new_j, x.get(i, old_j));
            }
        }
        for kind in [
            SelectorKind::Sis,
            SelectorKind::Dc,
            SelectorKind::L1Log,
            SelectorKind::EnLog,
            SelectorKind::L1Svm,
        ] {
            let spec = SelectorSpec::new(kind, 2);
            let base = rank_features(&x, &y, &spec, 1).unwrap();
            let perm_rank = rank_features(&permuted, &y, &spec, 1).unwrap();
            // Feature old_j sits at new position perm.index_of(old_j).
            let expected: Vec<usize> = base
                .iter()
                .map(|&old_j| perm.iter().position(|&p| p == old_j).unwrap())
                .collect();
            assert_eq!(perm_rank, expected, "{kind:?}");
        }
    }

    #[test]
    fn k_out_of_range_rejected() {
        let (x, y) = planted(30, 4, 2);
        assert!(fit_select(&x, &y, &SelectorSpec::new(SelectorKind::Sis, 0), 0).is_err());
        assert!(fit_select(&x, &y, &SelectorSpec::new(SelectorKind::Sis, 5), 0).is_err());
    }
}
