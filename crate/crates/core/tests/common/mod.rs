//! Shared helpers for integration tests.

pub mod oracle;

use rand::Rng;
use voxrad_core::features::{discretize, DiscretizationSpec, GreyLevelVolume};
use voxrad_core::rng::stream;

/// Random small discretized volume: dims <= 8 per axis, Ng <= 5, a random
/// but non-empty ROI.
pub fn random_glv(case: u64) -> (GreyLevelVolume, Vec<f32>, Vec<u8>, [usize; 3]) {
    let mut rng = stream(0xBEEF, "oracle-case", &[case]);
    let dims = [
        rng.random_range(2..=8usize),
        rng.random_range(2..=8usize),
        rng.random_range(2..=8usize),
    ];
    let n = dims[0] * dims[1] * dims[2];
    let ng = rng.random_range(2..=5u32);
    let mut values: Vec<f32> = (0..n).map(|_| rng.random::<f32>() * 10.0 - 2.0).collect();
    let mut roi: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < 0.7)).collect();
    if roi.iter().all(|&m| m == 0) {
        roi[0] = 1;
    }
    for (v, &m) in values.iter_mut().zip(roi.iter()) {
        if m == 0 {
            *v = 0.0;
        }
    }
    let glv = discretize(&values, &roi, dims, &DiscretizationSpec { bin_count: ng }).unwrap();
    (glv, values, roi, dims)
}

pub fn assert_close(name: &str, got: f64, want: f64, rel_tol: f64) {
    let denom = want.abs().max(got.abs()).max(1.0);
    let rel = (got - want).abs() / denom;
    assert!(
        rel < rel_tol,
        "{name}: implementation {got} vs oracle {want} (rel err {rel:.3e})"
    );
}
