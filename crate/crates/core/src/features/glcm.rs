//! Grey-level co-occurrence matrix features.
//!
//! Symmetric co-occurrence at distance 1 over the 13 unique 3D directions;
//! each feature is computed per direction on the normalized matrix and then
//! averaged over directions. Degenerate single-level ROIs use the pinned
//! conventions: correlation = 1, zero-variance ratios = 0.

use super::discretize::{GreyLevelVolume, DIRECTIONS_13};

pub const GLCM_FEATURE_NAMES: [&str; 24] = [
    "autocorrelation",
    "joint_average",
    "cluster_prominence",
    "cluster_shade",
    "cluster_tendency",
    "contrast",
    "correlation",
    "difference_average",
    "difference_entropy",
    "difference_variance",
    "joint_energy",
    "joint_entropy",
    "imc1",
    "imc2",
    "idm",
    "idmn",
    "id",
    "idn",
    "inverse_variance",
    "maximum_probability",
    "sum_average",
    "sum_entropy",
    "sum_squares",
    "sum_variance",
];

/// Build the symmetric pair-count matrix for one direction. Counts are
/// accumulated for (i,j) and (j,i). Indices are level-1-based, matrix is
/// (ng x ng) flattened row-major over levels 1..=ng.
pub fn cooccurrence_matrix(glv: &GreyLevelVolume, dir: [i64; 3]) -> Vec<f64> {
    let ng = glv.ng as usize;
    let mut counts = vec![0f64; ng * ng];
    let (lo, hi) = glv.bbox;
    for z in lo[2]..=hi[2] {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let a = glv.level_at(x, y, z);
                if a == 0 {
                    continue;
                }
                let nx = x as i64 + dir[0];
                let ny = y as i64 + dir[1];
                let nz = z as i64 + dir[2];
                if !glv.in_bounds(nx, ny, nz) {
                    continue;
                }
                let b = glv.level_at(nx as usize, ny as usize, nz as usize);
                if b == 0 {
                    continue;
                }
                let (ai, bi) = ((a - 1) as usize, (b - 1) as usize);
                counts[ai * ng + bi] += 1.0;
                counts[bi * ng + ai] += 1.0;
            }
        }
    }
    counts
}

/// Features of one normalized GLCM. Returns the 24-vector in
/// `GLCM_FEATURE_NAMES` order, or None when the direction saw no pairs.
fn matrix_features(counts: &[f64], ng: usize) -> Option<[f64; 24]> {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let p: Vec<f64> = counts.iter().map(|&c| c / total).collect();

    // Marginals (symmetric, so px == py) and present-level bookkeeping.
    let mut px = vec![0f64; ng];
    for i in 0..ng {
        for j in 0..ng {
            px[i] += p[i * ng + j];
        }
    }
    let n_present = px.iter().filter(|&&v| v > 0.0).count().max(1);

    // p_{x+y}(k), k = i+j in 2..=2ng, and p_{x-y}(k), k = |i-j| in 0..ng-1,
    // with i,j 1-based levels.
    let mut p_sum = vec![0f64; 2 * ng + 1];
    let mut p_diff = vec![0f64; ng];
    let mut mu = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            let v = p[i * ng + j];
            if v > 0.0 {
                p_sum[i + j + 2] += v;
                p_diff[i.abs_diff(j)] += v;
                mu += (i + 1) as f64 * v;
            }
        }
    }
    let sigma2: f64 = (0..ng)
        .map(|i| ((i + 1) as f64 - mu).powi(2) * px[i])
        .sum();

    let mut autocorrelation = 0.0;
    let mut cluster_prominence = 0.0;
    let mut cluster_shade = 0.0;
    let mut cluster_tendency = 0.0;
    let mut contrast = 0.0;
    let mut joint_energy = 0.0;
    let mut joint_entropy = 0.0;
    let mut idm = 0.0;
    let mut idmn = 0.0;
    let mut id = 0.0;
    let mut idn = 0.0;
    let mut inverse_variance = 0.0;
    let mut maximum_probability: f64 = 0.0;
    let mut sum_squares = 0.0;
    let mut corr_num = 0.0;
    let ngf = n_present as f64;
    for i in 0..ng {
        for j in 0..ng {
            let v = p[i * ng + j];
            if v <= 0.0 {
                continue;
            }
            let fi = (i + 1) as f64;
            let fj = (j + 1) as f64;
            let d = fi - fj;
            autocorrelation += fi * fj * v;
            cluster_prominence += (fi + fj - 2.0 * mu).powi(4) * v;
            cluster_shade += (fi + fj - 2.0 * mu).powi(3) * v;
            cluster_tendency += (fi + fj - 2.0 * mu).powi(2) * v;
            contrast += d * d * v;
            joint_energy += v * v;
            joint_entropy -= v * v.log2();
            idm += v / (1.0 + d * d);
            idmn += v / (1.0 + (d / ngf) * (d / ngf));
            id += v / (1.0 + d.abs());
            idn += v / (1.0 + d.abs() / ngf);
            if i != j {
                inverse_variance += v / (d * d);
            }
            maximum_probability = maximum_probability.max(v);
            sum_squares += (fi - mu).powi(2) * v;
            corr_num += fi * fj * v;
        }
    }
    let correlation = if sigma2 > 0.0 {
        (corr_num - mu * mu) / sigma2
    } else {
        1.0
    };

    let mut difference_average = 0.0;
    let mut difference_entropy = 0.0;
    for (k, &v) in p_diff.iter().enumerate() {
        if v > 0.0 {
            difference_average += k as f64 * v;
            difference_entropy -= v * v.log2();
        }
    }
    let mut difference_variance = 0.0;
    for (k, &v) in p_diff.iter().enumerate() {
        if v > 0.0 {
            difference_variance += (k as f64 - difference_average).powi(2) * v;
        }
    }

    let mut sum_average = 0.0;
    let mut sum_entropy = 0.0;
    for (k, &v) in p_sum.iter().enumerate() {
        if v > 0.0 {
            sum_average += k as f64 * v;
            sum_entropy -= v * v.log2();
        }
    }
    let mut sum_variance = 0.0;
    for (k, &v) in p_sum.iter().enumerate() {
        if v > 0.0 {
            sum_variance += (k as f64 - sum_average).powi(2) * v;
        }
    }

    // Informational measures of correlation. HX = HY by symmetry.
    let hx: f64 = -px
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>();
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            let joint = px[i] * px[j];
            if joint > 0.0 {
                hxy2 -= joint * joint.log2();
                if p[i * ng + j] > 0.0 {
                    hxy1 -= p[i * ng + j] * joint.log2();
                }
            }
        }
    }
    let imc1 = if hx > 0.0 {
        (joint_entropy - hxy1) / hx
    } else {
        0.0
    };
    let imc2 = {
        let arg = 1.0 - (-2.0 * (hxy2 - joint_entropy)).exp();
        if arg > 0.0 {
            arg.sqrt()
        } else {
            0.0
        }
    };

    Some([
        autocorrelation,
        mu,
        cluster_prominence,
        cluster_shade,
        cluster_tendency,
        contrast,
        correlation,
        difference_average,
        difference_entropy,
        difference_variance,
        joint_energy,
        joint_entropy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        inverse_variance,
        maximum_probability,
        sum_average,
        sum_entropy,
        sum_squares,
        sum_variance,
    ])
}

/// Direction-averaged GLCM features.
pub fn glcm_features(glv: &GreyLevelVolume) -> [f64; 24] {
    let mut acc = [0f64; 24];
    let mut n_dirs = 0usize;
    for dir in DIRECTIONS_13 {
        let counts = cooccurrence_matrix(glv, dir);
        if let Some(f) = matrix_features(&counts, glv.ng as usize) {
            for (a, v) in acc.iter_mut().zip(f.iter()) {
                *a += v;
            }
            n_dirs += 1;
        }
    }
    if n_dirs > 0 {
        for a in acc.iter_mut() {
            *a /= n_dirs as f64;
        }
    } else {
        // Single-voxel ROI: no pairs in any direction. Degenerate constants.
        acc[6] = 1.0; // correlation
        acc[10] = 1.0; // joint energy
        acc[13] = 0.0; // imc2
        acc[14] = 1.0; // idm
        acc[15] = 1.0;
        acc[16] = 1.0;
        acc[17] = 1.0;
        acc[19] = 1.0; // maximum probability
    }
    acc
}
