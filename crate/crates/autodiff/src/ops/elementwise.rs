//! Elementwise arithmetic and reductions.

use crate::graph::{BackwardRule, Graph, NodeId};
use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};

struct AddBack;

impl<T: Scalar> BackwardRule<T> for AddBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        _parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        vec![Some(grad_out.clone()), Some(grad_out.clone())]
    }
}

pub fn add<T: Scalar>(g: &mut Graph<T>, a: NodeId, b: NodeId) -> Result<NodeId> {
    if g.value(a).shape() != g.value(b).shape() {
        return Err(AdError::ShapeMismatch {
            op: "add",
            detail: format!("{:?} vs {:?}", g.value(a).shape(), g.value(b).shape()),
        });
    }
    let mut out = g.value(a).clone();
    out.add_assign(g.value(b));
    let tracked = g.any_parent_tracked(&[a, b]);
    Ok(g.push(out, tracked, vec![a, b], Some(Box::new(AddBack))))
}

struct MulBack;

impl<T: Scalar> BackwardRule<T> for MulBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        let da = Tensor::from_vec(
            grad_out.shape(),
            grad_out
                .data()
                .iter()
                .zip(parents[1].data())
                .map(|(&go, &b)| go * b)
                .collect(),
        );
        let db = Tensor::from_vec(
            grad_out.shape(),
            grad_out
                .data()
                .iter()
                .zip(parents[0].data())
                .map(|(&go, &a)| go * a)
                .collect(),
        );
        vec![Some(da), Some(db)]
    }
}

pub fn mul<T: Scalar>(g: &mut Graph<T>, a: NodeId, b: NodeId) -> Result<NodeId> {
    if g.value(a).shape() != g.value(b).shape() {
        return Err(AdError::ShapeMismatch {
            op: "mul",
            detail: format!("{:?} vs {:?}", g.value(a).shape(), g.value(b).shape()),
        });
    }
    let out = Tensor::from_vec(
        g.value(a).shape(),
        g.value(a)
            .data()
            .iter()
            .zip(g.value(b).data())
            .map(|(&x, &y)| x * y)
            .collect(),
    );
    let tracked = g.any_parent_tracked(&[a, b]);
    Ok(g.push(out, tracked, vec![a, b], Some(Box::new(MulBack))))
}

struct ScaleBack<T> {
    factor: T,
}

impl<T: Scalar> BackwardRule<T> for ScaleBack<T> {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        _parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        vec![Some(grad_out.map(|v| v * self.factor))]
    }
}

pub fn scale<T: Scalar>(g: &mut Graph<T>, x: NodeId, factor: T) -> Result<NodeId> {
    let out = g.value(x).map(|v| v * factor);
    let tracked = g.any_parent_tracked(&[x]);
    Ok(g.push(out, tracked, vec![x], Some(Box::new(ScaleBack { factor }))))
}

struct SumBack {
    shape: Vec<usize>,
}

impl<T: Scalar> BackwardRule<T> for SumBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        _parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        vec![Some(Tensor::filled(&self.shape, grad_out.item()))]
    }
}

/// Full reduction to a scalar.
pub fn sum<T: Scalar>(g: &mut Graph<T>, x: NodeId) -> Result<NodeId> {
    let total: T = g.value(x).data().iter().copied().sum();
    let shape = g.value(x).shape().to_vec();
    let tracked = g.any_parent_tracked(&[x]);
    Ok(g.push(
        Tensor::scalar(total),
        tracked,
        vec![x],
        Some(Box::new(SumBack { shape })),
    ))
}
