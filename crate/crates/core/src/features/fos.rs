//! First-order statistics of ROI intensities.
//!
//! Computed on continuous values except `entropy` and `uniformity`, which use
//! the discretized histogram. Percentiles use the nearest-rank definition.

use super::discretize::GreyLevelVolume;
use crate::stats::percentile_nearest_rank;

pub const FOS_FEATURE_NAMES: [&str; 19] = [
    "energy",
    "total_energy",
    "entropy",
    "minimum",
    "p10",
    "p90",
    "maximum",
    "mean",
    "median",
    "interquartile_range",
    "range",
    "mean_absolute_deviation",
    "robust_mean_absolute_deviation",
    "root_mean_squared",
    "standard_deviation",
    "skewness",
    "kurtosis",
    "variance",
    "uniformity",
];

/// `roi_values` are the continuous intensities inside the ROI; `glv` is the
/// matching discretization (for the histogram-based features);
/// `voxel_volume_mm3` scales total energy (1.0 at unit spacing).
pub fn fos_features(roi_values: &[f64], glv: &GreyLevelVolume, voxel_volume_mm3: f64) -> [f64; 19] {
    assert!(!roi_values.is_empty(), "FOS on empty ROI");
    let n = roi_values.len() as f64;
    let mut sorted = roi_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let minimum = sorted[0];
    let maximum = sorted[sorted.len() - 1];
    let mean = sorted.iter().sum::<f64>() / n;
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };

    let energy: f64 = sorted.iter().map(|v| v * v).sum();
    let rms = (energy / n).sqrt();

    let m2 = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = sorted.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = sorted.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    // Pearson kurtosis (not excess): 3 for a normal distribution, pinned to
    // 0 for a constant ROI.
    let kurtosis = if m2 > 0.0 { m4 / (m2 * m2) } else { 0.0 };

    let p10 = percentile_nearest_rank(&sorted, 10.0);
    let p90 = percentile_nearest_rank(&sorted, 90.0);
    let p25 = percentile_nearest_rank(&sorted, 25.0);
    let p75 = percentile_nearest_rank(&sorted, 75.0);

    let mad = sorted.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    let robust: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&v| v >= p10 && v <= p90)
        .collect();
    let rmad = if robust.is_empty() {
        0.0
    } else {
        let rmean = robust.iter().sum::<f64>() / robust.len() as f64;
        robust.iter().map(|v| (v - rmean).abs()).sum::<f64>() / robust.len() as f64
    };

    // Histogram features on the discretized levels.
    let hist = glv.histogram();
    let total: f64 = hist.iter().map(|&c| c as f64).sum();
    let mut entropy = 0.0;
    let mut uniformity = 0.0;
    for &c in hist.iter().skip(1) {
        if c > 0 {
            let p = c as f64 / total;
            entropy -= p * p.log2();
            uniformity += p * p;
        }
    }

    [
        energy,
        energy * voxel_volume_mm3,
        entropy,
        minimum,
        p10,
        p90,
        maximum,
        mean,
        median,
        p75 - p25,
        maximum - minimum,
        mad,
        rmad,
        rms,
        m2.sqrt(),
        skewness,
        kurtosis,
        m2,
        uniformity,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::discretize::{discretize, DiscretizationSpec};

    fn glv_for(values: &[f64]) -> GreyLevelVolume {
        let f: Vec<f32> = values.iter().map(|&v| v as f32).collect();
        let roi = vec![1u8; values.len()];
        discretize(&f, &roi, [values.len(), 1, 1], &DiscretizationSpec::default()).unwrap()
    }

    #[test]
    fn hand_arithmetic_on_1_2_3_4() {
        let values = [1.0, 2.0, 3.0, 4.0];
        let glv = glv_for(&values);
        let f = fos_features(&values, &glv, 1.0);
        let idx = |n: &str| FOS_FEATURE_NAMES.iter().position(|&x| x == n).unwrap();
        assert_eq!(f[idx("mean")], 2.5);
        assert_eq!(f[idx("median")], 2.5);
        assert_eq!(f[idx("range")], 3.0);
        assert!((f[idx("root_mean_squared")] - 7.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(f[idx("energy")], 30.0);
    }

    #[test]
    fn constant_roi_conventions() {
        let values = [6.0; 10];
        let glv = glv_for(&values);
        let f = fos_features(&values, &glv, 1.0);
        let idx = |n: &str| FOS_FEATURE_NAMES.iter().position(|&x| x == n).unwrap();
        assert_eq!(f[idx("variance")], 0.0);
        assert_eq!(f[idx("skewness")], 0.0);
        assert_eq!(f[idx("kurtosis")], 0.0);
        assert_eq!(f[idx("uniformity")], 1.0);
        assert_eq!(f[idx("entropy")], 0.0);
    }

    #[test]
    fn nearest_rank_p90() {
        let values = [0.0, 0.0, 0.0, 10.0];
        let glv = glv_for(&values);
        let f = fos_features(&values, &glv, 1.0);
        let idx = |n: &str| FOS_FEATURE_NAMES.iter().position(|&x| x == n).unwrap();
        assert_eq!(f[idx("p90")], 10.0);
    }
}
