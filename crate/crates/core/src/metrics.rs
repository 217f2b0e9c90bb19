//! Evaluation metrics: rank-based AUC, confusion-matrix metrics, ROC points.

use crate::error::{CoreError, Result};

/// Mann-Whitney AUC by midrank summation:
/// `P(score+ > score-) + 0.5 * P(tie)`.
///
/// The numerator is computed exactly (midranks are half-integers, and all
/// sums stay well inside f64's exact-integer range for realistic n), so the
/// result matches exhaustive pair counting bit-for-bit.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(CoreError::SizeMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(CoreError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // Midranks over tie groups, summed for the positive class.
    let mut rank_sum_pos = 0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share the midrank.
        let midrank = (i + 1 + j + 1) as f64 / 2.0;
        for &k in &order[i..=j] {
            if labels[k] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let n_pos_f = n_pos as f64;
    let u = rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0;
    Ok(u / (n_pos_f * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationMetrics {
    pub testing_error: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Positive class is relapse (1). Precision/recall are 0 when their
/// denominator is 0; F1 is the harmonic mean (0 when both are 0).
pub fn classification_metrics(pred: &[u8], labels: &[u8]) -> Result<ClassificationMetrics> {
    if pred.len() != labels.len() {
        return Err(CoreError::SizeMismatch(format!(
            "{} predictions vs {} labels",
            pred.len(),
            labels.len()
        )));
    }
    if pred.is_empty() {
        return Err(CoreError::SizeMismatch("empty prediction set".into()));
    }
    let mut tp = 0f64;
    let mut fp = 0f64;
    let mut fn_ = 0f64;
    let mut correct = 0usize;
    for (&p, &l) in pred.iter().zip(labels.iter()) {
        if p == l {
            correct += 1;
        }
        match (p, l) {
            (1, 1) => tp += 1.0,
            (1, 0) => fp += 1.0,
            (0, 1) => fn_ += 1.0,
            _ => {}
        }
    }
    let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassificationMetrics {
        testing_error: 1.0 - correct as f64 / pred.len() as f64,
        precision,
        recall,
        f1,
    })
}

/// ROC curve points (FPR, TPR) at every distinct score threshold, from
/// (0,0) to (1,1). Thresholds descend, so points ascend.
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>> {
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(CoreError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(points)
}
