//! Batch normalization over the channel axis.

use crate::graph::{BackwardRule, Graph, NodeId};
use crate::params::RunningStats;
use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnMode {
    Train,
    Eval,
}

struct BatchNormBack<T> {
    /// Per-element normalized activations (saved from forward).
    x_hat: Vec<T>,
    /// Per-channel 1/sqrt(var+eps).
    inv_std: Vec<T>,
    channels: usize,
    /// Elements per channel in the batch.
    count: usize,
    /// True when batch statistics were used (train path); the eval path has
    /// constant mean/var so the backward is a plain affine scaling.
    batch_stats: bool,
    layout: Layout,
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    channels: usize,
    spatial: usize,
}

impl Layout {
    #[inline]
    fn channel_of(&self, flat: usize) -> usize {
        (flat / self.spatial) % self.channels
    }
}

impl<T: Scalar> BackwardRule<T> for BatchNormBack<T> {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        let gamma = parents[1];
        let go = grad_out.data();
        let m = T::from_f64(self.count as f64);

        // Per-channel reductions.
        let mut sum_dy = vec![T::zero(); self.channels];
        let mut sum_dy_xhat = vec![T::zero(); self.channels];
        for (flat, &dy) in go.iter().enumerate() {
            let c = self.layout.channel_of(flat);
            sum_dy[c] += dy;
            sum_dy_xhat[c] += dy * self.x_hat[flat];
        }

        let mut dgamma = Tensor::zeros(&[self.channels]);
        let mut dbeta = Tensor::zeros(&[self.channels]);
        for c in 0..self.channels {
            dgamma.data_mut()[c] = sum_dy_xhat[c];
            dbeta.data_mut()[c] = sum_dy[c];
        }

        let mut dx = Tensor::zeros(parents[0].shape());
        if self.batch_stats {
            // dx = gamma * inv_std / m * (m*dy - sum(dy) - x_hat * sum(dy*x_hat))
            for (flat, v) in dx.data_mut().iter_mut().enumerate() {
                let c = self.layout.channel_of(flat);
                let term =
                    m * go[flat] - sum_dy[c] - self.x_hat[flat] * sum_dy_xhat[c];
                *v = gamma.data()[c] * self.inv_std[c] * term / m;
            }
        } else {
            for (flat, v) in dx.data_mut().iter_mut().enumerate() {
                let c = self.layout.channel_of(flat);
                *v = gamma.data()[c] * self.inv_std[c] * go[flat];
            }
        }
        vec![Some(dx), Some(dgamma), Some(dbeta)]
    }
}

/// Normalize per channel. Input is `[n, c]` or `[n, c, x, y, z]`.
///
/// Train mode uses batch statistics (biased variance) and updates `running`
/// with momentum 0.9; eval mode reads `running`. When the batch provides
/// fewer than two elements per channel, train mode falls back to the running
/// statistics to avoid a zero-variance blowup.
pub fn batch_norm<T: Scalar>(
    g: &mut Graph<T>,
    x: NodeId,
    gamma: NodeId,
    beta: NodeId,
    running: &mut RunningStats<T>,
    mode: BnMode,
) -> Result<NodeId> {
    let shape = g.value(x).shape().to_vec();
    if shape.len() != 2 && shape.len() != 5 {
        return Err(AdError::ShapeMismatch {
            op: "batch_norm",
            detail: format!("expected rank 2 or 5, got {:?}", shape),
        });
    }
    let n = shape[0];
    let channels = shape[1];
    let spatial: usize = shape[2..].iter().product::<usize>().max(1);
    if g.value(gamma).shape() != [channels] || g.value(beta).shape() != [channels] {
        return Err(AdError::ShapeMismatch {
            op: "batch_norm",
            detail: format!(
                "gamma {:?} / beta {:?} for {} channels",
                g.value(gamma).shape(),
                g.value(beta).shape(),
                channels
            ),
        });
    }
    let layout = Layout { channels, spatial };
    let count = n * spatial;
    let use_batch = mode == BnMode::Train && count >= 2;

    let xv = g.value(x).data();
    let (mean, var) = if use_batch {
        let mut mean = vec![T::zero(); channels];
        let mut var = vec![T::zero(); channels];
        for (flat, &v) in xv.iter().enumerate() {
            mean[layout.channel_of(flat)] += v;
        }
        let m = T::from_f64(count as f64);
        for mu in mean.iter_mut() {
            *mu = *mu / m;
        }
        for (flat, &v) in xv.iter().enumerate() {
            let c = layout.channel_of(flat);
            let d = v - mean[c];
            var[c] += d * d;
        }
        for s in var.iter_mut() {
            *s = *s / m;
        }
        // Update running statistics.
        let momentum = T::from_f64(BN_MOMENTUM);
        let one_minus = T::one() - momentum;
        for c in 0..channels {
            let rm = running.mean.data()[c];
            let rv = running.var.data()[c];
            running.mean.data_mut()[c] = momentum * rm + one_minus * mean[c];
            running.var.data_mut()[c] = momentum * rv + one_minus * var[c];
        }
        (mean, var)
    } else {
        (
            running.mean.data().to_vec(),
            running.var.data().to_vec(),
        )
    };

    let eps = T::from_f64(BN_EPS);
    let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + eps).sqrt()).collect();

    let gv = g.value(gamma).data().to_vec();
    let bv = g.value(beta).data().to_vec();
    let mut x_hat = vec![T::zero(); xv.len()];
    let mut out = Tensor::zeros(&shape);
    for (flat, o) in out.data_mut().iter_mut().enumerate() {
        let c = layout.channel_of(flat);
        let xh = (xv[flat] - mean[c]) * inv_std[c];
        x_hat[flat] = xh;
        *o = gv[c] * xh + bv[c];
    }

    let tracked = g.any_parent_tracked(&[x, gamma, beta]);
    Ok(g.push(
        out,
        tracked,
        vec![x, gamma, beta],
        Some(Box::new(BatchNormBack {
            x_hat,
            inv_std,
            channels,
            count,
            batch_stats: use_batch,
            layout,
        })),
    ))
}
