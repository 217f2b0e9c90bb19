//! CART decision trees (Gini impurity) and bagged forests.
//!
//! Used by the RF classifier (prediction) and the RF selector (mean
//! impurity decrease). Split gains are functions of class counts only, so
//! tree structure is exactly reproducible.

use super::DenseMatrix;
use crate::rng::stream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub enum Mtry {
    /// floor(sqrt(d)), the classification default.
    Sqrt,
    All,
    Fixed(usize),
}

impl Mtry {
    fn resolve(self, d: usize) -> usize {
        match self {
            Mtry::Sqrt => (d as f64).sqrt().floor().max(1.0) as usize,
            Mtry::All => d,
            Mtry::Fixed(m) => m.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub mtry: Mtry,
    pub min_samples_split: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            mtry: Mtry::Sqrt,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        prob: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict_prob(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { prob } => return *prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    x: &'a DenseMatrix,
    y: &'a [u8],
    mtry: usize,
    min_samples_split: usize,
    n_train: usize,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

impl<'a> TreeBuilder<'a> {
    /// Returns the node index. `rows` may contain duplicates (bootstrap).
    fn build(&mut self, rows: &mut Vec<usize>, rng: &mut ChaCha8Rng) -> usize {
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        let node_gini = gini(pos, n);
        if n < self.min_samples_split || pos == 0 || pos == n {
            let id = self.nodes.len();
            self.nodes.push(Node::Leaf {
                prob: pos as f64 / n as f64,
            });
            return id;
        }

        // Sample candidate features without replacement.
        let d = self.x.n_cols;
        let mut candidates: Vec<usize> = (0..d).collect();
        for i in 0..self.mtry.min(d) {
            let j = rng.random_range(i..d);
            candidates.swap(i, j);
        }
        candidates.truncate(self.mtry.min(d));

        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for &f in &candidates {
            order.clear();
            order.extend_from_slice(rows);
            order.sort_by(|&a, &b| {
                self.x
                    .get(a, f)
                    .partial_cmp(&self.x.get(b, f))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut left_pos = 0usize;
            for i in 0..n - 1 {
                if self.y[order[i]] == 1 {
                    left_pos += 1;
                }
                let v = self.x.get(order[i], f);
                let v_next = self.x.get(order[i + 1], f);
                if v == v_next {
                    continue;
                }
                let left_n = i + 1;
                let right_n = n - left_n;
                let right_pos = pos - left_pos;
                let gain = node_gini
                    - (left_n as f64 / n as f64) * gini(left_pos, left_n)
                    - (right_n as f64 / n as f64) * gini(right_pos, right_n);
                if gain > best.map(|(g, _, _)| g).unwrap_or(1e-12) {
                    best = Some((gain, f, 0.5 * (v + v_next)));
                }
            }
        }

        match best {
            None => {
                let id = self.nodes.len();
                self.nodes.push(Node::Leaf {
                    prob: pos as f64 / n as f64,
                });
                id
            }
            Some((gain, feature, threshold)) => {
                self.importance[feature] += gain * n as f64 / self.n_train as f64;
                let (mut left_rows, mut right_rows): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .copied()
                    .partition(|&r| self.x.get(r, feature) <= threshold);
                let id = self.nodes.len();
                self.nodes.push(Node::Leaf { prob: 0.0 }); // placeholder
                let left = self.build(&mut left_rows, rng);
                let right = self.build(&mut right_rows, rng);
                self.nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                id
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    /// Bootstrap membership per tree (for out-of-bag evaluation).
    in_bag: Vec<Vec<bool>>,
    /// Mean impurity decrease per feature, normalized to sum 1.
    pub importance: Vec<f64>,
}

impl RandomForest {
    pub fn fit(x: &DenseMatrix, y: &[u8], config: &ForestConfig, seed: u64) -> Self {
        let n = x.n_rows;
        let mtry = config.mtry.resolve(x.n_cols);
        let results: Vec<(DecisionTree, Vec<bool>, Vec<f64>)> = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream(seed, "rf-tree", &[t as u64]);
                let mut rows: Vec<usize> =
                    (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut in_bag = vec![false; n];
                for &r in &rows {
                    in_bag[r] = true;
                }
                let mut builder = TreeBuilder {
                    x,
                    y,
                    mtry,
                    min_samples_split: config.min_samples_split,
                    n_train: n,
                    nodes: Vec::new(),
                    importance: vec![0.0; x.n_cols],
                };
                builder.build(&mut rows, &mut rng);
                (
                    DecisionTree {
                        nodes: builder.nodes,
                    },
                    in_bag,
                    builder.importance,
                )
            })
            .collect();

        let mut importance = vec![0.0; x.n_cols];
        let mut trees = Vec::with_capacity(config.n_trees);
        let mut in_bag = Vec::with_capacity(config.n_trees);
        for (tree, bag, imp) in results {
            for (a, b) in importance.iter_mut().zip(imp.iter()) {
                *a += b;
            }
            trees.push(tree);
            in_bag.push(bag);
        }
        let total: f64 = importance.iter().sum();
        if total > 0.0 {
            for v in importance.iter_mut() {
                *v /= total;
            }
        }
        RandomForest {
            trees,
            in_bag,
            importance,
        }
    }

    /// Mean of per-tree leaf probabilities.
    pub fn predict_prob(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_prob(x)).sum();
        sum / self.trees.len() as f64
    }

    /// Out-of-bag hard-vote predictions. Integer vote counts make the
    /// result exactly independent of tree evaluation order; samples that
    /// were in every bag get None.
    pub fn oob_predictions(&self, x: &DenseMatrix) -> Vec<Option<u8>> {
        let mut votes_pos = vec![0u32; x.n_rows];
        let mut votes_total = vec![0u32; x.n_rows];
        for (tree, bag) in self.trees.iter().zip(self.in_bag.iter()) {
            for i in 0..x.n_rows {
                if !bag[i] {
                    votes_total[i] += 1;
                    if tree.predict_prob(x.row(i)) >= 0.5 {
                        votes_pos[i] += 1;
                    }
                }
            }
        }
        (0..x.n_rows)
            .map(|i| {
                if votes_total[i] == 0 {
                    None
                } else {
                    Some(u8::from(2 * votes_pos[i] >= votes_total[i]))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted_data(n: usize, d: usize, seed: u64) -> (DenseMatrix, Vec<u8>) {
        let mut rng = stream(seed, "tree-test", &[]);
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let label = u8::from(rng.random::<f64>() < 0.5);
            let mut row = vec![0.0; d];
            for (j, value) in row.iter_mut().enumerate() {
                *value = if j == 0 {
                    label as f64 * 2.0 - 1.0 + 0.2 * crate::rng::normal(&mut rng)
                } else {
                    crate::rng::normal(&mut rng)
                };
            }
            rows.push(row);
            y.push(label);
        }
        (DenseMatrix::from_rows(&rows), y)
    }

    #[test]
    fn forest_learns_planted_signal() {
        let (x, y) = planted_data(120, 8, 5);
        let forest = RandomForest::fit(
            &x,
            &y,
            &ForestConfig {
                n_trees: 60,
                ..Default::default()
            },
            11,
        );
        // Feature 0 dominates the importances.
        let best = forest
            .importance
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(best, 0);
        // Training predictions recover labels almost everywhere.
        let correct = (0..x.n_rows)
            .filter(|&i| u8::from(forest.predict_prob(x.row(i)) >= 0.5) == y[i])
            .count();
        assert!(correct >= 115, "{correct}/120");
    }

    #[test]
    fn forest_is_deterministic() {
        let (x, y) = planted_data(60, 5, 9);
        let cfg = ForestConfig {
            n_trees: 20,
            ..Default::default()
        };
        let a = RandomForest::fit(&x, &y, &cfg, 3);
        let b = RandomForest::fit(&x, &y, &cfg, 3);
        assert_eq!(a.importance, b.importance);
        for i in 0..x.n_rows {
            assert_eq!(a.predict_prob(x.row(i)), b.predict_prob(x.row(i)));
        }
    }

    #[test]
    fn oob_is_invariant_to_tree_order() {
        let (x, y) = planted_data(80, 6, 13);
        let cfg = ForestConfig {
            n_trees: 30,
            ..Default::default()
        };
        let mut forest = RandomForest::fit(&x, &y, &cfg, 7);
        let before = forest.oob_predictions(&x);
        // Reverse the evaluation order of trees and bags.
        forest.trees.reverse();
        forest.in_bag.reverse();
        let after = forest.oob_predictions(&x);
        assert_eq!(before, after);
    }
}
