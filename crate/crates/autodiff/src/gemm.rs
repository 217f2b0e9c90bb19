//! Small deterministic matrix-multiply kernels.
//!
//! `C = A * B` with row-major operands. Parallelism splits the rows of `C`,
//! so every output element is produced by exactly one task with a fixed
//! serial inner loop: results are bit-identical for any thread count.

use crate::tensor::Scalar;
use rayon::prelude::*;

/// Below this flop count the serial kernel is used.
const PAR_THRESHOLD: usize = 1 << 16;

/// C[m,n] += A[m,k] * B[k,n]
pub fn matmul_acc<T: Scalar>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    assert_eq!(a.len(), m * k, "gemm: A size");
    assert_eq!(b.len(), k * n, "gemm: B size");
    assert_eq!(c.len(), m * n, "gemm: C size");
    if m * k * n >= PAR_THRESHOLD && m > 1 {
        c.par_chunks_mut(n)
            .zip(a.par_chunks(k))
            .for_each(|(crow, arow)| row_kernel(arow, b, crow, k, n));
    } else {
        for (crow, arow) in c.chunks_mut(n).zip(a.chunks(k)) {
            row_kernel(arow, b, crow, k, n);
        }
    }
}

/// C = A * B (C overwritten).
pub fn matmul<T: Scalar>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    c.fill(T::zero());
    matmul_acc(a, b, c, m, k, n);
}

/// C[m,n] += A^T[m,k] * B[k,n] where A is stored as [k,m].
pub fn matmul_at_acc<T: Scalar>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    assert_eq!(a.len(), k * m, "gemm: A^T size");
    assert_eq!(b.len(), k * n, "gemm: B size");
    assert_eq!(c.len(), m * n, "gemm: C size");
    let body = |i: usize, crow: &mut [T]| {
        for p in 0..k {
            let aip = a[p * m + i];
            if aip != T::zero() {
                let brow = &b[p * n..p * n + n];
                for (cv, &bv) in crow.iter_mut().zip(brow.iter()) {
                    *cv += aip * bv;
                }
            }
        }
    };
    if m * k * n >= PAR_THRESHOLD && m > 1 {
        c.par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, crow)| body(i, crow));
    } else {
        for (i, crow) in c.chunks_mut(n).enumerate() {
            body(i, crow);
        }
    }
}

/// C[m,n] += A[m,k] * B^T[k,n] where B is stored as [n,k].
pub fn matmul_bt_acc<T: Scalar>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    assert_eq!(a.len(), m * k, "gemm: A size");
    assert_eq!(b.len(), n * k, "gemm: B^T size");
    assert_eq!(c.len(), m * n, "gemm: C size");
    let body = |arow: &[T], crow: &mut [T]| {
        for (cv, brow) in crow.iter_mut().zip(b.chunks(k)) {
            let mut acc = T::zero();
            for (&av, &bv) in arow.iter().zip(brow.iter()) {
                acc += av * bv;
            }
            *cv += acc;
        }
    };
    if m * k * n >= PAR_THRESHOLD && m > 1 {
        c.par_chunks_mut(n)
            .zip(a.par_chunks(k))
            .for_each(|(crow, arow)| body(arow, crow));
    } else {
        for (crow, arow) in c.chunks_mut(n).zip(a.chunks(k)) {
            body(arow, crow);
        }
    }
}

fn row_kernel<T: Scalar>(arow: &[T], b: &[T], crow: &mut [T], k: usize, n: usize) {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_matmul() {
        // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
        let a = vec![1.0f64, 2.0, 3.0, 4.0];
        let b = vec![5.0f64, 6.0, 7.0, 8.0];
        let mut c = vec![0.0f64; 4];
        matmul(&a, &b, &mut c, 2, 2, 2);
        assert_eq!(c, vec![19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn transpose_variants_agree() {
        let m = 3;
        let k = 4;
        let n = 5;
        let a: Vec<f64> = (0..m * k).map(|i| (i as f64) * 0.3 - 1.0).collect();
        let b: Vec<f64> = (0..k * n).map(|i| (i as f64) * 0.1 + 0.5).collect();
        let mut c0 = vec![0.0; m * n];
        matmul(&a, &b, &mut c0, m, k, n);

        // A^T stored as [k,m]
        let mut at = vec![0.0; k * m];
        for i in 0..m {
            for p in 0..k {
                at[p * m + i] = a[i * k + p];
            }
        }
        let mut c1 = vec![0.0; m * n];
        matmul_at_acc(&at, &b, &mut c1, m, k, n);
        for (x, y) in c0.iter().zip(c1.iter()) {
            assert!((x - y).abs() < 1e-12);
        }

        // B^T stored as [n,k]
        let mut bt = vec![0.0; n * k];
        for p in 0..k {
            for j in 0..n {
                bt[j * k + p] = b[p * n + j];
            }
        }
        let mut c2 = vec![0.0; m * n];
        matmul_bt_acc(&a, &bt, &mut c2, m, k, n);
        for (x, y) in c0.iter().zip(c2.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
