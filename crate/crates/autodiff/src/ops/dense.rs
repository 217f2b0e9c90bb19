//! Fully-connected layer.

use crate::gemm;
use crate::graph::{BackwardRule, Graph, NodeId};
use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};

struct DenseBack {
    n: usize,
    d_in: usize,
    d_out: usize,
}

impl<T: Scalar> BackwardRule<T> for DenseBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        let (n, d_in, d_out) = (self.n, self.d_in, self.d_out);
        let x = parents[0];
        let w = parents[1];

        // dX[n,d_in] = dY[n,d_out] * W[d_out,d_in]
        let mut dx = Tensor::zeros(&[n, d_in]);
        gemm::matmul_acc(grad_out.data(), w.data(), dx.data_mut(), n, d_out, d_in);

        // dW[d_out,d_in] = dY^T[d_out,n] * X[n,d_in]
        let mut dw = Tensor::zeros(&[d_out, d_in]);
        gemm::matmul_at_acc(grad_out.data(), x.data(), dw.data_mut(), d_out, n, d_in);

        // db[d_out] = column sums of dY
        let mut db = Tensor::zeros(&[d_out]);
        for row in grad_out.data().chunks(d_out) {
            for (b, &v) in db.data_mut().iter_mut().zip(row.iter()) {
                *b += v;
            }
        }
        vec![Some(dx), Some(dw), Some(db)]
    }
}

/// `y[n,o] = sum_i x[n,i] * w[o,i] + b[o]`, with `w` of shape `[d_out, d_in]`.
pub fn dense<T: Scalar>(g: &mut Graph<T>, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
    let xs = g.value(x).shape().to_vec();
    let ws = g.value(w).shape().to_vec();
    let bs = g.value(b).shape().to_vec();
    if xs.len() != 2 || ws.len() != 2 || bs.len() != 1 || xs[1] != ws[1] || ws[0] != bs[0] {
        return Err(AdError::ShapeMismatch {
            op: "dense",
            detail: format!("x{:?} w{:?} b{:?}", xs, ws, bs),
        });
    }
    let (n, d_in, d_out) = (xs[0], xs[1], ws[0]);
    let mut out = Tensor::zeros(&[n, d_out]);
    gemm::matmul_bt_acc(
        g.value(x).data(),
        g.value(w).data(),
        out.data_mut(),
        n,
        d_in,
        d_out,
    );
    let bias = g.value(b).data().to_vec();
    for row in out.data_mut().chunks_mut(d_out) {
        for (v, &bv) in row.iter_mut().zip(bias.iter()) {
            *v += bv;
        }
    }
    let tracked = g.any_parent_tracked(&[x, w, b]);
    Ok(g.push(
        out,
        tracked,
        vec![x, w, b],
        Some(Box::new(DenseBack { n, d_in, d_out })),
    ))
}
