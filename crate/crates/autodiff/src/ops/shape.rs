//! Reshape and concatenation.

use crate::graph::{BackwardRule, Graph, NodeId};
use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};

struct ReshapeBack {
    original: Vec<usize>,
}

impl<T: Scalar> BackwardRule<T> for ReshapeBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        _parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        vec![Some(grad_out.clone().reshaped(&self.original))]
    }
}

pub fn reshape<T: Scalar>(g: &mut Graph<T>, x: NodeId, shape: &[usize]) -> Result<NodeId> {
    let original = g.value(x).shape().to_vec();
    if shape.iter().product::<usize>() != g.value(x).numel() {
        return Err(AdError::ShapeMismatch {
            op: "reshape",
            detail: format!("{:?} -> {:?}", original, shape),
        });
    }
    let out = g.value(x).clone().reshaped(shape);
    let tracked = g.any_parent_tracked(&[x]);
    Ok(g.push(
        out,
        tracked,
        vec![x],
        Some(Box::new(ReshapeBack { original })),
    ))
}

struct ConcatBack {
    axis: usize,
    /// Extents of each input along `axis`.
    extents: Vec<usize>,
    out_shape: Vec<usize>,
}

impl<T: Scalar> BackwardRule<T> for ConcatBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        let outer: usize = self.out_shape[..self.axis].iter().product();
        let inner: usize = self.out_shape[self.axis + 1..].iter().product();
        let total_axis: usize = self.extents.iter().sum();
        let mut grads: Vec<Tensor<T>> = parents.iter().map(|p| Tensor::zeros(p.shape())).collect();
        let go = grad_out.data();
        for o in 0..outer {
            let mut axis_offset = 0;
            for (gi, &ext) in grads.iter_mut().zip(self.extents.iter()) {
                let dst = gi.data_mut();
                for a in 0..ext {
                    let src_base = (o * total_axis + axis_offset + a) * inner;
                    let dst_base = (o * ext + a) * inner;
                    dst[dst_base..dst_base + inner]
                        .copy_from_slice(&go[src_base..src_base + inner]);
                }
                axis_offset += ext;
            }
        }
        grads.into_iter().map(Some).collect()
    }
}

/// Concatenate along `axis`. All other axes must agree.
pub fn concat<T: Scalar>(g: &mut Graph<T>, xs: &[NodeId], axis: usize) -> Result<NodeId> {
    if xs.is_empty() {
        return Err(AdError::ShapeMismatch {
            op: "concat",
            detail: "empty input list".into(),
        });
    }
    let first = g.value(xs[0]).shape().to_vec();
    if axis >= first.len() {
        return Err(AdError::ShapeMismatch {
            op: "concat",
            detail: format!("axis {} out of range for rank {}", axis, first.len()),
        });
    }
    let mut extents = Vec::with_capacity(xs.len());
    for &x in xs {
        let s = g.value(x).shape();
        if s.len() != first.len()
            || s.iter()
                .zip(first.iter())
                .enumerate()
                .any(|(i, (a, b))| i != axis && a != b)
        {
            return Err(AdError::ShapeMismatch {
                op: "concat",
                detail: format!("{:?} vs {:?} along axis {}", s, first, axis),
            });
        }
        extents.push(s[axis]);
    }
    let mut out_shape = first.clone();
    out_shape[axis] = extents.iter().sum();
    let outer: usize = out_shape[..axis].iter().product();
    let inner: usize = out_shape[axis + 1..].iter().product();
    let total_axis = out_shape[axis];

    let mut out = Tensor::zeros(&out_shape);
    {
        let dst = out.data_mut();
        for o in 0..outer {
            let mut axis_offset = 0;
            for (&x, &ext) in xs.iter().zip(extents.iter()) {
                let src = g.value(x).data();
                for a in 0..ext {
                    let src_base = (o * ext + a) * inner;
                    let dst_base = (o * total_axis + axis_offset + a) * inner;
                    dst[dst_base..dst_base + inner]
                        .copy_from_slice(&src[src_base..src_base + inner]);
                }
                axis_offset += ext;
            }
        }
    }
    let tracked = g.any_parent_tracked(xs);
    Ok(g.push(
        out,
        tracked,
        xs.to_vec(),
        Some(Box::new(ConcatBack {
            axis,
            extents,
            out_shape,
        })),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops;

    #[test]
    fn concat_axis1_values() {
        let mut g = Graph::<f64>::new();
        let a = g.leaf(Tensor::from_vec(&[2, 2], vec![1., 2., 3., 4.]));
        let b = g.leaf(Tensor::from_vec(&[2, 1], vec![5., 6.]));
        let c = concat(&mut g, &[a, b], 1).unwrap();
        assert_eq!(g.value(c).shape(), &[2, 3]);
        assert_eq!(g.value(c).data(), &[1., 2., 5., 3., 4., 6.]);
    }

    #[test]
    fn concat_backward_no_cross_talk() {
        let mut g = Graph::<f64>::new();
        let a = g.param(Tensor::from_vec(&[1, 2], vec![1., 2.]));
        let b = g.param(Tensor::from_vec(&[1, 2], vec![3., 4.]));
        let c = concat(&mut g, &[a, b], 1).unwrap();
        // Select only the first branch by multiplying with a mask.
        let mask = g.leaf(Tensor::from_vec(&[1, 4], vec![1., 1., 0., 0.]));
        let masked = ops::mul(&mut g, c, mask).unwrap();
        let loss = ops::sum(&mut g, masked).unwrap();
        g.backward(loss).unwrap();
        assert_eq!(g.grad(a).unwrap().data(), &[1., 1.]);
        assert_eq!(g.grad(b).unwrap().data(), &[0., 0.]);
    }
}
