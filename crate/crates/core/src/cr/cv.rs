//! Stratified k-fold cross-validation and hyper-parameter grid search.

use super::classifiers::{train_classifier, ClassifierKind, ClassifierParams};
use super::selectors::{rank_features, SelectorSpec};
use super::DenseMatrix;
use crate::error::{CoreError, Result};
use crate::metrics::auc;
use crate::rng::{shuffled_indices, stream};

/// Stratified folds: each class is shuffled and dealt round-robin so every
/// fold holds both classes. Errors when a class has fewer members than
/// folds (a fold would otherwise be single-class).
pub fn stratified_folds(
    y: &[u8],
    folds: usize,
    seed: u64,
    repeat: u64,
) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(CoreError::CrossValidation(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if folds > y.len() {
        return Err(CoreError::CrossValidation(format!(
            "{folds} folds exceed {} samples",
            y.len()
        )));
    }
    let mut assignments = vec![Vec::new(); folds];
    for class in [0u8, 1u8] {
        let members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.len() < folds {
            return Err(CoreError::CrossValidation(format!(
                "class {class} has {} members, fewer than {folds} folds",
                members.len()
            )));
        }
        let mut rng = stream(seed, "cv-folds", &[repeat, u64::from(class)]);
        let order = shuffled_indices(members.len(), &mut rng);
        for (pos, &oi) in order.iter().enumerate() {
            assignments[pos % folds].push(members[oi]);
        }
    }
    for fold in assignments.iter_mut() {
        fold.sort_unstable();
    }
    Ok(assignments)
}

/// One grid candidate: feature count and classifier parameters.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub k: usize,
    pub params: ClassifierParams,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub best: Candidate,
    pub best_mean_auc: f64,
    /// (k, params index, mean AUC) per candidate in canonical order.
    pub table: Vec<(usize, usize, f64)>,
}

/// Classifier parameter grid in canonical strongest-regularization-first
/// order (so a plain "keep first max" scan implements the tie-break).
pub fn default_param_grid(kind: ClassifierKind) -> Vec<ClassifierParams> {
    let base = ClassifierParams::default();
    match kind {
        ClassifierKind::L2Log => [1.0, 0.1, 0.01, 0.001]
            .iter()
            .map(|&lambda| ClassifierParams { lambda, ..base })
            .collect(),
        ClassifierKind::Ksvm => {
            let mut grid = Vec::new();
            for &c in &[0.1, 1.0, 10.0] {
                for gamma in [None, Some(0.01), Some(0.1)] {
                    grid.push(ClassifierParams { c, gamma, ..base });
                }
            }
            grid
        }
        ClassifierKind::Lsvm => [0.1, 1.0, 10.0]
            .iter()
            .map(|&c| ClassifierParams { c, ..base })
            .collect(),
        ClassifierKind::Knn => [15, 9, 5, 3]
            .iter()
            .map(|&knn_k| ClassifierParams { knn_k, ..base })
            .collect(),
        ClassifierKind::Nnet => [4, 8, 16]
            .iter()
            .map(|&hidden| ClassifierParams { hidden, ..base })
            .collect(),
        ClassifierKind::AdaBoost | ClassifierKind::Rf | ClassifierKind::Lda | ClassifierKind::Nb => {
            vec![base]
        }
    }
}

pub const DEFAULT_K_GRID: [usize; 4] = [8, 16, 32, 64];

/// Per-fold context: holdout rows, training rows, and the feature ranking
/// computed on the training rows only (selection is part of the model, so
/// it must not see the fold's validation part).
pub struct FoldContext {
    pub holdout: Vec<usize>,
    pub train_rows: Vec<usize>,
    pub ranking: Vec<usize>,
}

pub fn build_fold_contexts(
    x: &DenseMatrix,
    y: &[u8],
    selector: &SelectorSpec,
    folds: usize,
    seed: u64,
    repeat: u64,
) -> Result<Vec<FoldContext>> {
    let fold_sets = stratified_folds(y, folds, seed, repeat)?;
    let all_cols: Vec<usize> = (0..x.n_cols).collect();
    fold_sets
        .into_iter()
        .map(|holdout| {
            let train_rows: Vec<usize> =
                (0..y.len()).filter(|i| !holdout.contains(i)).collect();
            let x_train = x.gather(&train_rows, &all_cols, None);
            let y_train: Vec<u8> = train_rows.iter().map(|&i| y[i]).collect();
            let ranking = rank_features(&x_train, &y_train, selector, seed)?;
            Ok(FoldContext {
                holdout,
                train_rows,
                ranking,
            })
        })
        .collect()
}

/// Grid search over (k, classifier parameters) given precomputed fold
/// contexts. Ties resolve toward the earliest candidate in canonical
/// order: smallest k first, then the strongest regularization as laid out
/// by [`default_param_grid`].
pub fn grid_search(
    x: &DenseMatrix,
    y: &[u8],
    tnm: Option<&[f64]>,
    contexts: &[FoldContext],
    classifier: ClassifierKind,
    param_grid: &[ClassifierParams],
    k_grid: &[usize],
    seed: u64,
) -> Result<CvOutcome> {
    if param_grid.is_empty() || k_grid.is_empty() {
        return Err(CoreError::CrossValidation("empty grid".into()));
    }
    let mut table = Vec::new();
    let mut best: Option<(f64, Candidate)> = None;
    for &k in k_grid {
        let k = k.min(x.n_cols);
        for (pi, params) in param_grid.iter().enumerate() {
            let mut aucs = Vec::with_capacity(contexts.len());
            for ctx in contexts {
                let cols = &ctx.ranking[..k];
                let x_train = x.gather(&ctx.train_rows, cols, tnm);
                let y_train: Vec<u8> = ctx.train_rows.iter().map(|&i| y[i]).collect();
                let x_val = x.gather(&ctx.holdout, cols, tnm);
                let y_val: Vec<u8> = ctx.holdout.iter().map(|&i| y[i]).collect();
                let model = train_classifier(&x_train, &y_train, classifier, params, seed)?;
                let scores: Vec<f64> =
                    (0..x_val.n_rows).map(|i| model.score(x_val.row(i))).collect();
                aucs.push(auc(&scores, &y_val)?);
            }
            let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
            table.push((k, pi, mean));
            let better = match &best {
                None => true,
                Some((best_auc, _)) => mean > *best_auc, // strict: first max wins
            };
            if better {
                best = Some((
                    mean,
                    Candidate {
                        k,
                        params: *params,
                    },
                ));
            }
        }
    }
    let (best_mean_auc, best) = best.unwrap();
    Ok(CvOutcome {
        best,
        best_mean_auc,
        table,
    })
}

/// Stratified grid-search cross-validation for one (selector, classifier)
/// pair: computes fold rankings then delegates to [`grid_search`].
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    x: &DenseMatrix,
    y: &[u8],
    tnm: Option<&[f64]>,
    selector: &SelectorSpec,
    classifier: ClassifierKind,
    param_grid: &[ClassifierParams],
    k_grid: &[usize],
    folds: usize,
    seed: u64,
    repeat: u64,
) -> Result<CvOutcome> {
    let contexts = build_fold_contexts(x, y, selector, folds, seed, repeat)?;
    grid_search(x, y, tnm, &contexts, classifier, param_grid, k_grid, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr::selectors::SelectorKind;
    use crate::rng::normal;

    #[test]
    fn folds_are_stratified_partitions() {
        let y: Vec<u8> = (0..50).map(|i| u8::from(i % 3 == 0)).collect();
        let folds = stratified_folds(&y, 5, 7, 0).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        for fold in &folds {
            assert!(fold.iter().any(|&i| y[i] == 1), "fold missing positives");
            assert!(fold.iter().any(|&i| y[i] == 0), "fold missing negatives");
        }
    }

    #[test]
    fn folds_exceeding_samples_rejected() {
        let y = vec![0u8, 1, 0, 1];
        assert!(stratified_folds(&y, 5, 0, 0).is_err());
    }

    #[test]
    fn sparse_class_rejected() {
        let mut y = vec![0u8; 20];
        y[0] = 1;
        y[1] = 1;
        assert!(stratified_folds(&y, 5, 0, 0).is_err());
    }

    #[test]
    fn singleton_grid_returned() {
        let mut rng = crate::rng::stream(1, "cv-test", &[]);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![f64::from(i % 2) * 2.0 - 1.0 + 0.1 * normal(&mut rng), normal(&mut rng)])
            .collect();
        let y: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        let x = DenseMatrix::from_rows(&rows);
        let params = vec![ClassifierParams::default()];
        let outcome = cross_validate(
            &x,
            &y,
            None,
            &SelectorSpec::new(SelectorKind::Sis, 2),
            ClassifierKind::L2Log,
            &params,
            &[2],
            4,
            3,
            0,
        )
        .unwrap();
        assert_eq!(outcome.best.k, 2);
        assert_eq!(outcome.table.len(), 1);
    }

    #[test]
    fn tie_break_prefers_smaller_k() {
        // Perfectly separable single feature: every k attains AUC 1, so the
        // scan must return the smallest k.
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let s = f64::from(i % 2) * 4.0 - 2.0;
                vec![s, s + 0.01 * i as f64, 0.0]
            })
            .collect();
        let y: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        let x = DenseMatrix::from_rows(&rows);
        let outcome = cross_validate(
            &x,
            &y,
            None,
            &SelectorSpec::new(SelectorKind::Sis, 2),
            ClassifierKind::L2Log,
            &default_param_grid(ClassifierKind::L2Log),
            &[1, 2],
            4,
            5,
            0,
        )
        .unwrap();
        assert_eq!(outcome.best.k, 1);
    }
}
