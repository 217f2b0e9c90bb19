//! Random-forest classifier over the shared CART trees.

use super::{ClassifierKind, TrainedClassifier};
use crate::cr::tree::{ForestConfig, Mtry, RandomForest};
use crate::cr::DenseMatrix;

pub struct ForestClassifier {
    forest: RandomForest,
}

impl ForestClassifier {
    pub fn fit(x: &DenseMatrix, y: &[u8], trees: usize, seed: u64) -> Self {
        let forest = RandomForest::fit(
            x,
            y,
            &ForestConfig {
                n_trees: trees,
                mtry: Mtry::Sqrt,
                min_samples_split: 2,
            },
            seed,
        );
        ForestClassifier { forest }
    }
}

impl TrainedClassifier for ForestClassifier {
    fn score(&self, x: &[f64]) -> f64 {
        self.forest.predict_prob(x)
    }
    fn prob(&self, x: &[f64]) -> f64 {
        self.forest.predict_prob(x)
    }
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Rf
    }
}
