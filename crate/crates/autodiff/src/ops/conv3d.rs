//! 3D convolution (cross-correlation) with SAME padding.
//!
//! Input `[n, c_in, x, y, z]`, weights `[c_out, c_in, k, k, k]`, bias
//! `[c_out]`. Output spatial dims are `ceil(in/stride)`. The kernel lowers
//! each sample to column tiles (im2col) and multiplies with the weight
//! matrix; tiles bound the transient memory. Samples are processed in
//! parallel; every output element is produced by a fixed serial loop, so
//! results do not depend on the thread count.

use crate::gemm;
use crate::graph::{BackwardRule, Graph, NodeId};
use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};
use rayon::prelude::*;

/// Spatial output elements per im2col tile.
const TILE: usize = 4096;

/// Output extent for SAME padding: `ceil(in / stride)`.
pub fn conv_output_dim(input: usize, stride: usize) -> usize {
    input.div_ceil(stride)
}

/// Left padding for SAME semantics (extra padding goes on the right).
pub fn same_padding(input: usize, kernel: usize, stride: usize) -> usize {
    let out = conv_output_dim(input, stride);
    let total = ((out - 1) * stride + kernel).saturating_sub(input);
    total / 2
}

#[derive(Clone, Copy)]
struct ConvGeom {
    c_in: usize,
    c_out: usize,
    k: usize,
    stride: usize,
    in_dims: [usize; 3],
    out_dims: [usize; 3],
    pad: [usize; 3],
}

impl ConvGeom {
    fn patch_len(&self) -> usize {
        self.c_in * self.k * self.k * self.k
    }
    fn in_spatial(&self) -> usize {
        self.in_dims.iter().product()
    }
    fn out_spatial(&self) -> usize {
        self.out_dims.iter().product()
    }
}

/// Fill `col` (patch_len x tile_width) with the receptive fields of output
/// positions `[tile_start, tile_start + tile_width)`.
fn im2col_tile<T: Scalar>(x: &[T], geom: &ConvGeom, tile_start: usize, col: &mut [T]) {
    let [ix, iy, iz] = geom.in_dims;
    let [_, oy, oz] = geom.out_dims;
    let k = geom.k;
    let tile_width = col.len() / geom.patch_len();
    col.fill(T::zero());
    for (t, out_flat) in (tile_start..tile_start + tile_width).enumerate() {
        let ozi = out_flat % oz;
        let oyi = (out_flat / oz) % oy;
        let oxi = out_flat / (oz * oy);
        let base_x = (oxi * geom.stride) as isize - geom.pad[0] as isize;
        let base_y = (oyi * geom.stride) as isize - geom.pad[1] as isize;
        let base_z = (ozi * geom.stride) as isize - geom.pad[2] as isize;
        let mut row = 0usize;
        for c in 0..geom.c_in {
            let chan = &x[c * geom.in_spatial()..(c + 1) * geom.in_spatial()];
            for dx in 0..k {
                let sx = base_x + dx as isize;
                for dy in 0..k {
                    let sy = base_y + dy as isize;
                    for dz in 0..k {
                        let sz = base_z + dz as isize;
                        if sx >= 0
                            && sy >= 0
                            && sz >= 0
                            && (sx as usize) < ix
                            && (sy as usize) < iy
                            && (sz as usize) < iz
                        {
                            col[row * tile_width + t] =
                                chan[(sx as usize * iy + sy as usize) * iz + sz as usize];
                        }
                        row += 1;
                    }
                }
            }
        }
    }
}

/// Scatter-add a column-gradient tile back into the input gradient.
fn col2im_tile<T: Scalar>(col: &[T], geom: &ConvGeom, tile_start: usize, dx_sample: &mut [T]) {
    let [ix, iy, iz] = geom.in_dims;
    let [_, oy, oz] = geom.out_dims;
    let k = geom.k;
    let tile_width = col.len() / geom.patch_len();
    for (t, out_flat) in (tile_start..tile_start + tile_width).enumerate() {
        let ozi = out_flat % oz;
        let oyi = (out_flat / oz) % oy;
        let oxi = out_flat / (oz * oy);
        let base_x = (oxi * geom.stride) as isize - geom.pad[0] as isize;
        let base_y = (oyi * geom.stride) as isize - geom.pad[1] as isize;
        let base_z = (ozi * geom.stride) as isize - geom.pad[2] as isize;
        let mut row = 0usize;
        for c in 0..geom.c_in {
            let chan_off = c * geom.in_spatial();
            for dx in 0..k {
                let sx = base_x + dx as isize;
                for dy in 0..k {
                    let sy = base_y + dy as isize;
                    for dz in 0..k {
                        let sz = base_z + dz as isize;
                        if sx >= 0
                            && sy >= 0
                            && sz >= 0
                            && (sx as usize) < ix
                            && (sy as usize) < iy
                            && (sz as usize) < iz
                        {
                            dx_sample[chan_off
                                + (sx as usize * iy + sy as usize) * iz
                                + sz as usize] += col[row * tile_width + t];
                        }
                        row += 1;
                    }
                }
            }
        }
    }
}

fn forward_sample<T: Scalar>(x: &[T], w: &[T], b: &[T], geom: &ConvGeom, out: &mut [T]) {
    let patch_len = geom.patch_len();
    let out_spatial = geom.out_spatial();
    let mut col = vec![T::zero(); patch_len * TILE.min(out_spatial)];
    let mut tile_start = 0;
    while tile_start < out_spatial {
        let width = TILE.min(out_spatial - tile_start);
        let col_tile = &mut col[..patch_len * width];
        im2col_tile(x, geom, tile_start, col_tile);
        // out_tile[c_out, width] = W[c_out, patch_len] * col[patch_len, width]
        let mut tile_out = vec![T::zero(); geom.c_out * width];
        gemm_serial(w, col_tile, &mut tile_out, patch_len, width);
        for c in 0..geom.c_out {
            let dst = &mut out[c * out_spatial + tile_start..c * out_spatial + tile_start + width];
            let src = &tile_out[c * width..(c + 1) * width];
            for (d, &s) in dst.iter_mut().zip(src.iter()) {
                *d = s + b[c];
            }
        }
        tile_start += width;
    }
}

// Per-sample serial GEMM: sample-level parallelism already saturates cores.
fn gemm_serial<T: Scalar>(a: &[T], b: &[T], c: &mut [T], k: usize, n: usize) {
    for (crow, arow) in c.chunks_mut(n).zip(a.chunks(k)) {
        for p in 0..k {
            let ap = arow[p];
            if ap != T::zero() {
                let brow = &b[p * n..p * n + n];
                for (cv, &bv) in crow.iter_mut().zip(brow.iter()) {
                    *cv += ap * bv;
                }
            }
        }
    }
}

struct Conv3dBack {
    geom: ConvGeom,
    n: usize,
}

impl<T: Scalar> BackwardRule<T> for Conv3dBack {
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        _value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>> {
        let geom = &self.geom;
        let x = parents[0];
        let w = parents[1];
        let patch_len = geom.patch_len();
        let in_sample = geom.c_in * geom.in_spatial();
        let out_sample = geom.c_out * geom.out_spatial();
        let out_spatial = geom.out_spatial();

        // Per-sample (dx, dw, db); reduced serially in sample order below so
        // the result is independent of the parallel schedule.
        let per_sample: Vec<(Vec<T>, Vec<T>, Vec<T>)> = (0..self.n)
            .into_par_iter()
            .map(|s| {
                let xs = &x.data()[s * in_sample..(s + 1) * in_sample];
                let dys = &grad_out.data()[s * out_sample..(s + 1) * out_sample];
                let mut dx_s = vec![T::zero(); in_sample];
                let mut dw_s = vec![T::zero(); geom.c_out * patch_len];
                let mut db_s = vec![T::zero(); geom.c_out];
                for c in 0..geom.c_out {
                    for &v in &dys[c * out_spatial..(c + 1) * out_spatial] {
                        db_s[c] += v;
                    }
                }
                let mut col = vec![T::zero(); patch_len * TILE.min(out_spatial)];
                let mut dy_tile = vec![T::zero(); geom.c_out * TILE.min(out_spatial)];
                let mut dcol = vec![T::zero(); patch_len * TILE.min(out_spatial)];
                let mut tile_start = 0;
                while tile_start < out_spatial {
                    let width = TILE.min(out_spatial - tile_start);
                    let col_tile = &mut col[..patch_len * width];
                    im2col_tile(xs, geom, tile_start, col_tile);
                    // Gather dY tile: [c_out, width]
                    let dyt = &mut dy_tile[..geom.c_out * width];
                    for c in 0..geom.c_out {
                        dyt[c * width..(c + 1) * width].copy_from_slice(
                            &dys[c * out_spatial + tile_start
                                ..c * out_spatial + tile_start + width],
                        );
                    }
                    // dW += dY_tile * col_tile^T
                    gemm::matmul_bt_acc(dyt, col_tile, &mut dw_s, geom.c_out, width, patch_len);
                    // dcol = W^T * dY_tile
                    let dcol_tile = &mut dcol[..patch_len * width];
                    dcol_tile.fill(T::zero());
                    gemm::matmul_at_acc(w.data(), dyt, dcol_tile, patch_len, geom.c_out, width);
                    col2im_tile(dcol_tile, geom, tile_start, &mut dx_s);
                    tile_start += width;
                }
                (dx_s, dw_s, db_s)
            })
            .collect();

        let mut dx = Tensor::zeros(x.shape());
        let mut dw = Tensor::zeros(w.shape());
        let mut db = Tensor::zeros(&[geom.c_out]);
        for (s, (dx_s, dw_s, db_s)) in per_sample.into_iter().enumerate() {
            dx.data_mut()[s * in_sample..(s + 1) * in_sample].copy_from_slice(&dx_s);
            for (a, b) in dw.data_mut().iter_mut().zip(dw_s.iter()) {
                *a += *b;
            }
            for (a, b) in db.data_mut().iter_mut().zip(db_s.iter()) {
                *a += *b;
            }
        }
        vec![Some(dx), Some(dw), Some(db)]
    }
}

/// SAME-padded 3D convolution with cubic kernels and stride 1 or 2.
pub fn conv3d<T: Scalar>(
    g: &mut Graph<T>,
    x: NodeId,
    w: NodeId,
    b: NodeId,
    stride: usize,
) -> Result<NodeId> {
    let xs = g.value(x).shape().to_vec();
    let ws = g.value(w).shape().to_vec();
    let bs = g.value(b).shape().to_vec();
    if xs.len() != 5 || ws.len() != 5 {
        return Err(AdError::ShapeMismatch {
            op: "conv3d",
            detail: format!("x{:?} w{:?}", xs, ws),
        });
    }
    if !(ws[2] == ws[3] && ws[3] == ws[4]) {
        return Err(AdError::ShapeMismatch {
            op: "conv3d",
            detail: format!("kernel must be cubic, got {:?}", &ws[2..]),
        });
    }
    if xs[1] != ws[1] || bs != [ws[0]] {
        return Err(AdError::ShapeMismatch {
            op: "conv3d",
            detail: format!("x{:?} w{:?} b{:?}", xs, ws, bs),
        });
    }
    if stride != 1 && stride != 2 {
        return Err(AdError::ShapeMismatch {
            op: "conv3d",
            detail: format!("stride must be 1 or 2, got {stride}"),
        });
    }
    let n = xs[0];
    let in_dims = [xs[2], xs[3], xs[4]];
    let k = ws[2];
    let out_dims = [
        conv_output_dim(in_dims[0], stride),
        conv_output_dim(in_dims[1], stride),
        conv_output_dim(in_dims[2], stride),
    ];
    let geom = ConvGeom {
        c_in: xs[1],
        c_out: ws[0],
        k,
        stride,
        in_dims,
        out_dims,
        pad: [
            same_padding(in_dims[0], k, stride),
            same_padding(in_dims[1], k, stride),
            same_padding(in_dims[2], k, stride),
        ],
    };

    let out_sample = geom.c_out * geom.out_spatial();
    let in_sample = geom.c_in * geom.in_spatial();
    let mut out = Tensor::zeros(&[n, geom.c_out, out_dims[0], out_dims[1], out_dims[2]]);
    {
        let xv = g.value(x).data();
        let wv = g.value(w).data();
        let bv = g.value(b).data();
        let out_data = out.data_mut();
        out_data
            .par_chunks_mut(out_sample)
            .enumerate()
            .for_each(|(s, out_s)| {
                forward_sample(&xv[s * in_sample..(s + 1) * in_sample], wv, bv, &geom, out_s);
            });
    }
    let tracked = g.any_parent_tracked(&[x, w, b]);
    Ok(g.push(
        out,
        tracked,
        vec![x, w, b],
        Some(Box::new(Conv3dBack { geom, n })),
    ))
}
