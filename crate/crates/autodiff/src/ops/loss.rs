//! Softmax cross-entropy with max-subtraction stabilization.

use crate::graph::{BackwardRule, Graph, NodeId};
use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};

struct SoftmaxXentBack<T> {
    probs: Vec<T>,
    labels: Vec<usize>,
    classes: usize,
}

impl<T: Scalar> BackwardRule<T> for SoftmaxXentBack<T> {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        let n = self.labels.len();
        let scale = grad_out.item() / T::from_f64(n as f64);
        let mut dx = Tensor::zeros(parents[0].shape());
        for (i, &label) in self.labels.iter().enumerate() {
            for c in 0..self.classes {
                let p = self.probs[i * self.classes + c];
                let target = if c == label { T::one() } else { T::zero() };
                dx.data_mut()[i * self.classes + c] = (p - target) * scale;
            }
        }
        vec![Some(dx)]
    }
}

/// Mean cross-entropy over the batch. Returns the scalar loss node and the
/// detached class probabilities `[n, classes]`.
pub fn softmax_xent<T: Scalar>(
    g: &mut Graph<T>,
    logits: NodeId,
    labels: &[usize],
) -> Result<(NodeId, Tensor<T>)> {
    let shape = g.value(logits).shape().to_vec();
    if shape.len() != 2 || shape[0] != labels.len() {
        return Err(AdError::ShapeMismatch {
            op: "softmax_xent",
            detail: format!("logits {:?}, {} labels", shape, labels.len()),
        });
    }
    let (n, classes) = (shape[0], shape[1]);
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(AdError::ShapeMismatch {
            op: "softmax_xent",
            detail: format!("label {} out of range for {} classes", bad, classes),
        });
    }
    let x = g.value(logits).data();
    let mut probs = vec![T::zero(); n * classes];
    let mut loss = T::zero();
    for i in 0..n {
        let row = &x[i * classes..(i + 1) * classes];
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut denom = T::zero();
        for c in 0..classes {
            let e = (row[c] - max).exp();
            probs[i * classes + c] = e;
            denom += e;
        }
        for c in 0..classes {
            probs[i * classes + c] = probs[i * classes + c] / denom;
        }
        let p_true = probs[i * classes + labels[i]];
        loss -= p_true.max(T::from_f64(1e-300)).ln();
    }
    loss = loss / T::from_f64(n as f64);

    let probs_tensor = Tensor::from_vec(&[n, classes], probs.clone());
    let tracked = g.any_parent_tracked(&[logits]);
    let node = g.push(
        Tensor::scalar(loss),
        tracked,
        vec![logits],
        Some(Box::new(SoftmaxXentBack {
            probs,
            labels: labels.to_vec(),
            classes,
        })),
    );
    Ok((node, probs_tensor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_loss_is_ln2() {
        let mut g = Graph::<f64>::new();
        let logits = g.param(Tensor::from_vec(&[2, 2], vec![0., 0., 0., 0.]));
        let (loss, probs) = softmax_xent(&mut g, logits, &[0, 1]).unwrap();
        assert!((g.value(loss).item() - std::f64::consts::LN_2).abs() < 1e-12);
        for &p in probs.data() {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut g = Graph::<f64>::new();
        let logits = g.param(Tensor::from_vec(&[3, 2], vec![4., -2., 0.3, 0.7, -5., 9.]));
        let (_, probs) = softmax_xent(&mut g, logits, &[0, 1, 1]).unwrap();
        for row in probs.data().chunks(2) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
