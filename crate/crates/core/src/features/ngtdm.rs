//! Neighboring grey-tone difference matrix features.
//!
//! For each ROI voxel the average level of its in-ROI 26-neighborhood is
//! compared with the voxel's own level; per-level sums of these absolute
//! differences drive the five classic descriptors. Voxels with no in-ROI
//! neighbor still count toward `n_i` but contribute zero difference.

use super::discretize::GreyLevelVolume;

pub const NGTDM_FEATURE_NAMES: [&str; 5] =
    ["coarseness", "contrast", "busyness", "complexity", "strength"];

/// Cap applied when the coarseness denominator vanishes (flat regions).
pub const COARSENESS_CAP: f64 = 1e6;

/// Per-level (count n_i, difference sum s_i), index 0 unused.
pub fn tone_difference_table(glv: &GreyLevelVolume) -> (Vec<f64>, Vec<f64>) {
    let ng = glv.ng as usize;
    let mut n = vec![0f64; ng + 1];
    let mut s = vec![0f64; ng + 1];
    let (lo, hi) = glv.bbox;
    for z in lo[2]..=hi[2] {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let level = glv.level_at(x, y, z);
                if level == 0 {
                    continue;
                }
                let mut sum = 0f64;
                let mut count = 0usize;
                for dz in -1..=1i64 {
                    for dy in -1..=1i64 {
                        for dx in -1..=1i64 {
                            if dx == 0 && dy == 0 && dz == 0 {
                                continue;
                            }
                            let (nx, ny, nz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                            if !glv.in_bounds(nx, ny, nz) {
                                continue;
                            }
                            let l = glv.level_at(nx as usize, ny as usize, nz as usize);
                            if l != 0 {
                                sum += l as f64;
                                count += 1;
                            }
                        }
                    }
                }
                n[level as usize] += 1.0;
                if count > 0 {
                    s[level as usize] += (level as f64 - sum / count as f64).abs();
                }
            }
        }
    }
    (n, s)
}

pub fn ngtdm_features(glv: &GreyLevelVolume) -> [f64; 5] {
    let (n, s) = tone_difference_table(glv);
    let nvp: f64 = n.iter().sum();
    if nvp == 0.0 {
        return [0.0; 5];
    }
    let ng = glv.ng as usize;
    let p: Vec<f64> = n.iter().map(|&c| c / nvp).collect();
    let present: Vec<usize> = (1..=ng).filter(|&i| p[i] > 0.0).collect();
    let ngp = present.len() as f64;

    // Coarseness
    let denom: f64 = present.iter().map(|&i| p[i] * s[i]).sum();
    let coarseness = if denom > 0.0 {
        (1.0 / denom).min(COARSENESS_CAP)
    } else {
        COARSENESS_CAP
    };

    // Contrast
    let contrast = if ngp > 1.0 {
        let mut pairs = 0.0;
        for &i in &present {
            for &j in &present {
                pairs += p[i] * p[j] * ((i as f64) - (j as f64)).powi(2);
            }
        }
        let s_total: f64 = s.iter().sum();
        (pairs / (ngp * (ngp - 1.0))) * (s_total / nvp)
    } else {
        0.0
    };

    // Busyness
    let busyness = {
        let mut abs_sum = 0.0;
        for &i in &present {
            for &j in &present {
                abs_sum += ((i as f64) * p[i] - (j as f64) * p[j]).abs();
            }
        }
        if abs_sum > 0.0 {
            denom / abs_sum
        } else {
            0.0
        }
    };

    // Complexity
    let mut complexity = 0.0;
    for &i in &present {
        for &j in &present {
            let pi_pj = p[i] + p[j];
            if pi_pj > 0.0 {
                complexity +=
                    ((i as f64) - (j as f64)).abs() * (p[i] * s[i] + p[j] * s[j]) / pi_pj;
            }
        }
    }
    complexity /= nvp;

    // Strength
    let s_total: f64 = s.iter().sum();
    let strength = if s_total > 0.0 {
        let mut num = 0.0;
        for &i in &present {
            for &j in &present {
                num += (p[i] + p[j]) * ((i as f64) - (j as f64)).powi(2);
            }
        }
        num / s_total
    } else {
        0.0
    };

    [coarseness, contrast, busyness, complexity, strength]
}
