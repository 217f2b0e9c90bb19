//! ELU, ReLU and inverted dropout.

use crate::graph::{BackwardRule, Graph, NodeId};
use crate::tensor::{Scalar, Tensor};
use crate::Result;
use rand::Rng;

struct ReluBack;

impl<T: Scalar> BackwardRule<T> for ReluBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        let dx = Tensor::from_vec(
            grad_out.shape(),
            grad_out
                .data()
                .iter()
                .zip(parents[0].data())
                .map(|(&go, &x)| if x > T::zero() { go } else { T::zero() })
                .collect(),
        );
        vec![Some(dx)]
    }
}

pub fn relu<T: Scalar>(g: &mut Graph<T>, x: NodeId) -> Result<NodeId> {
    let out = g.value(x).map(|v| if v > T::zero() { v } else { T::zero() });
    let tracked = g.any_parent_tracked(&[x]);
    Ok(g.push(out, tracked, vec![x], Some(Box::new(ReluBack))))
}

struct EluBack;

impl<T: Scalar> BackwardRule<T> for EluBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        // d/dx elu(x) = 1 for x > 0, elu(x) + 1 otherwise (alpha = 1).
        let dx = Tensor::from_vec(
            grad_out.shape(),
            grad_out
                .data()
                .iter()
                .zip(parents[0].data().iter().zip(value.data()))
                .map(|(&go, (&x, &y))| {
                    if x > T::zero() {
                        go
                    } else {
                        go * (y + T::one())
                    }
                })
                .collect(),
        );
        vec![Some(dx)]
    }
}

/// ELU with alpha = 1: `x` for `x > 0`, `exp(x) - 1` otherwise.
pub fn elu<T: Scalar>(g: &mut Graph<T>, x: NodeId) -> Result<NodeId> {
    let out = g.value(x).map(|v| {
        if v > T::zero() {
            v
        } else {
            v.exp() - T::one()
        }
    });
    let tracked = g.any_parent_tracked(&[x]);
    Ok(g.push(out, tracked, vec![x], Some(Box::new(EluBack))))
}

struct DropoutBack<T> {
    mask: Vec<T>,
}

impl<T: Scalar> BackwardRule<T> for DropoutBack<T> {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        _parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        let dx = Tensor::from_vec(
            grad_out.shape(),
            grad_out
                .data()
                .iter()
                .zip(self.mask.iter())
                .map(|(&go, &m)| go * m)
                .collect(),
        );
        vec![Some(dx)]
    }
}

/// Inverted dropout: at train time kept units are scaled by `1/(1-rate)`;
/// at eval time (`train = false`) the op is the identity. The mask is drawn
/// from `rng` in element order, one draw per element.
pub fn dropout<T: Scalar, R: Rng>(
    g: &mut Graph<T>,
    x: NodeId,
    rate: f64,
    train: bool,
    rng: &mut R,
) -> Result<NodeId> {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0,1)");
    let tracked = g.any_parent_tracked(&[x]);
    if !train || rate == 0.0 {
        let out = g.value(x).clone();
        return Ok(g.push(
            out,
            tracked,
            vec![x],
            Some(Box::new(DropoutBack {
                mask: vec![T::one(); g.value(x).numel()],
            })),
        ));
    }
    let keep_scale = T::from_f64(1.0 / (1.0 - rate));
    let mask: Vec<T> = (0..g.value(x).numel())
        .map(|_| {
            if rng.random::<f64>() < rate {
                T::zero()
            } else {
                keep_scale
            }
        })
        .collect();
    let out = Tensor::from_vec(
        g.value(x).shape(),
        g.value(x)
            .data()
            .iter()
            .zip(mask.iter())
            .map(|(&v, &m)| v * m)
            .collect(),
    );
    Ok(g.push(out, tracked, vec![x], Some(Box::new(DropoutBack { mask }))))
}
