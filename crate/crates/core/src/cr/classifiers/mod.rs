//! The nine classification methods behind one fit/predict contract.

mod adaboost;
mod forest;
mod knn;
mod lda;
mod logistic;
mod nb;
mod nnet;
mod svm;

pub use adaboost::AdaBoost;
pub use svm::KernelKind;

use super::{require_two_classes, DenseMatrix};
use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "L2-LOG")]
    L2Log,
    #[serde(rename = "KSVM")]
    Ksvm,
    #[serde(rename = "LSVM")]
    Lsvm,
    #[serde(rename = "AdaBoost")]
    AdaBoost,
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "Nnet")]
    Nnet,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "LDA")]
    Lda,
    #[serde(rename = "NB")]
    Nb,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 9] = [
        ClassifierKind::L2Log,
        ClassifierKind::Ksvm,
        ClassifierKind::Lsvm,
        ClassifierKind::AdaBoost,
        ClassifierKind::Rf,
        ClassifierKind::Nnet,
        ClassifierKind::Knn,
        ClassifierKind::Lda,
        ClassifierKind::Nb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::L2Log => "L2-LOG",
            ClassifierKind::Ksvm => "KSVM",
            ClassifierKind::Lsvm => "LSVM",
            ClassifierKind::AdaBoost => "AdaBoost",
            ClassifierKind::Rf => "RF",
            ClassifierKind::Nnet => "Nnet",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Lda => "LDA",
            ClassifierKind::Nb => "NB",
        }
    }
}

/// Flat hyper-parameter bag; each method reads the knobs it understands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierParams {
    /// L2-LOG ridge strength.
    pub lambda: f64,
    /// SVM box constraint.
    pub c: f64,
    /// RBF width; None = 1/d heuristic.
    pub gamma: Option<f64>,
    /// AdaBoost rounds.
    pub rounds: usize,
    /// RF tree count.
    pub trees: usize,
    /// Nnet hidden units.
    pub hidden: usize,
    /// KNN neighbor count.
    pub knn_k: usize,
    /// LDA covariance shrinkage.
    pub shrinkage: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            lambda: 0.01,
            c: 1.0,
            gamma: None,
            rounds: 100,
            trees: 500,
            hidden: 8,
            knn_k: 5,
            shrinkage: 1e-3,
        }
    }
}

/// A fitted binary classifier.
///
/// `score` is monotone in the estimated P(y = 1) (a raw margin for the SVM
/// and boosting families); `prob` is on the probability scale (margin
/// methods map through a fitted logistic link); `predict` thresholds the
/// probability at 0.5.
pub trait TrainedClassifier: Send + Sync {
    fn score(&self, x: &[f64]) -> f64;
    fn prob(&self, x: &[f64]) -> f64;
    fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.prob(x) >= 0.5)
    }
    fn kind(&self) -> ClassifierKind;
}

/// Fit one classifier. Deterministic given (data, spec, seed).
pub fn train_classifier(
    x: &DenseMatrix,
    y: &[u8],
    kind: ClassifierKind,
    params: &ClassifierParams,
    seed: u64,
) -> Result<Box<dyn TrainedClassifier>> {
    require_two_classes(y)?;
    if x.n_rows != y.len() {
        return Err(CoreError::SizeMismatch(format!(
            "{} rows vs {} labels",
            x.n_rows,
            y.len()
        )));
    }
    if x.n_cols == 0 {
        return Err(CoreError::InvalidParameter("no features".into()));
    }
    Ok(match kind {
        ClassifierKind::L2Log => Box::new(logistic::RidgeLogistic::fit(x, y, params.lambda)?),
        ClassifierKind::Ksvm => Box::new(svm::SvmClassifier::fit(
            x,
            y,
            params.c,
            KernelKind::Rbf {
                gamma: params.gamma.unwrap_or(1.0 / x.n_cols as f64),
            },
        )?),
        ClassifierKind::Lsvm => {
            Box::new(svm::SvmClassifier::fit(x, y, params.c, KernelKind::Linear)?)
        }
        ClassifierKind::AdaBoost => Box::new(adaboost::AdaBoost::fit(x, y, params.rounds)?),
        ClassifierKind::Rf => Box::new(forest::ForestClassifier::fit(x, y, params.trees, seed)),
        ClassifierKind::Nnet => Box::new(nnet::NnetClassifier::fit(x, y, params.hidden, seed)),
        ClassifierKind::Knn => Box::new(knn::KnnClassifier::fit(x, y, params.knn_k)?),
        ClassifierKind::Lda => Box::new(lda::LdaClassifier::fit(x, y, params.shrinkage)?),
        ClassifierKind::Nb => Box::new(nb::GaussianNb::fit(x, y)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, stream};

    fn separable_2d(n: usize, seed: u64) -> (DenseMatrix, Vec<u8>) {
        let mut rng = stream(seed, "clf-test", &[]);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = u8::from(i % 2 == 1);
            let offset = if label == 1 { 2.5 } else { -2.5 };
            rows.push(vec![
                offset + 0.5 * normal(&mut rng),
                offset + 0.5 * normal(&mut rng),
            ]);
            y.push(label);
        }
        (DenseMatrix::from_rows(&rows), y)
    }

    /// Four clusters at the XOR corners.
    fn xor_data(per_cluster: usize, seed: u64) -> (DenseMatrix, Vec<u8>) {
        let mut rng = stream(seed, "xor", &[]);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (cx, cy, label) in [
            (-1.0, -1.0, 0u8),
            (1.0, 1.0, 0u8),
            (-1.0, 1.0, 1u8),
            (1.0, -1.0, 1u8),
        ] {
            for _ in 0..per_cluster {
                rows.push(vec![cx + 0.2 * normal(&mut rng), cy + 0.2 * normal(&mut rng)]);
                y.push(label);
            }
        }
        (DenseMatrix::from_rows(&rows), y)
    }

    fn training_accuracy(
        model: &dyn TrainedClassifier,
        x: &DenseMatrix,
        y: &[u8],
    ) -> f64 {
        let correct = (0..x.n_rows)
            .filter(|&i| model.predict(x.row(i)) == y[i])
            .count();
        correct as f64 / x.n_rows as f64
    }

    #[test]
    fn linear_methods_zero_error_on_separable_data() {
        let (x, y) = separable_2d(60, 1);
        for kind in [ClassifierKind::Lsvm, ClassifierKind::L2Log] {
            let model = train_classifier(&x, &y, kind, &ClassifierParams::default(), 3).unwrap();
            assert_eq!(training_accuracy(model.as_ref(), &x, &y), 1.0, "{kind:?}");
        }
    }

    #[test]
    fn xor_separates_kernel_from_linear() {
        let (x, y) = xor_data(20, 2);
        let params = ClassifierParams {
            c: 10.0,
            gamma: Some(1.0),
            ..Default::default()
        };
        let lsvm = train_classifier(&x, &y, ClassifierKind::Lsvm, &params, 3).unwrap();
        let ksvm = train_classifier(&x, &y, ClassifierKind::Ksvm, &params, 3).unwrap();
        let lin_acc = training_accuracy(lsvm.as_ref(), &x, &y);
        let rbf_acc = training_accuracy(ksvm.as_ref(), &x, &y);
        assert!((0.35..=0.65).contains(&lin_acc), "linear on XOR: {lin_acc}");
        assert!(rbf_acc >= 0.95, "RBF on XOR: {rbf_acc}");
    }

    #[test]
    fn every_method_fits_and_scores_monotone_with_prob() {
        let (x, y) = separable_2d(40, 5);
        for kind in ClassifierKind::ALL {
            let model =
                train_classifier(&x, &y, kind, &ClassifierParams::default(), 7).unwrap();
            assert_eq!(model.kind(), kind);
            // Scores and probabilities must order identically.
            let mut pairs: Vec<(f64, f64)> = (0..x.n_rows)
                .map(|i| (model.score(x.row(i)), model.prob(x.row(i))))
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for w in pairs.windows(2) {
                assert!(
                    w[1].1 >= w[0].1 - 1e-9,
                    "{kind:?}: prob not monotone in score"
                );
            }
            for i in 0..x.n_rows {
                let p = model.prob(x.row(i));
                assert!((0.0..=1.0).contains(&p), "{kind:?} prob {p}");
            }
        }
    }

    #[test]
    fn single_class_rejected() {
        let (x, _) = separable_2d(10, 8);
        let y = vec![0u8; 10];
        assert!(train_classifier(
            &x,
            &y,
            ClassifierKind::L2Log,
            &ClassifierParams::default(),
            0
        )
        .is_err());
    }

    #[test]
    fn knn_k1_memorizes_training_data() {
        let (x, y) = separable_2d(30, 9);
        let params = ClassifierParams {
            knn_k: 1,
            ..Default::default()
        };
        let model = train_classifier(&x, &y, ClassifierKind::Knn, &params, 0).unwrap();
        assert_eq!(training_accuracy(model.as_ref(), &x, &y), 1.0);
    }
}
