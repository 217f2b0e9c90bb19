//! Grey-level size-zone matrix features.
//!
//! A zone is a maximal 26-connected component of equal-level ROI voxels.
//! Unlike run-length matrices there is no direction dependence.

use super::discretize::GreyLevelVolume;

pub const GLSZM_FEATURE_NAMES: [&str; 16] = [
    "small_area_emphasis",
    "large_area_emphasis",
    "gray_level_nonuniformity",
    "gray_level_nonuniformity_normalized",
    "size_zone_nonuniformity",
    "size_zone_nonuniformity_normalized",
    "zone_percentage",
    "gray_level_variance",
    "zone_variance",
    "zone_entropy",
    "low_gray_level_zone_emphasis",
    "high_gray_level_zone_emphasis",
    "small_area_low_gray_level_emphasis",
    "small_area_high_gray_level_emphasis",
    "large_area_low_gray_level_emphasis",
    "large_area_high_gray_level_emphasis",
];

/// All (level, zone_size) pairs via flood fill over 26-connectivity.
pub fn zones(glv: &GreyLevelVolume) -> Vec<(u32, usize)> {
    let mut visited = vec![false; glv.levels.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    let (lo, hi) = glv.bbox;
    for z in lo[2]..=hi[2] {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let start = glv.index(x, y, z);
                let level = glv.levels[start];
                if level == 0 || visited[start] {
                    continue;
                }
                let mut size = 0usize;
                visited[start] = true;
                stack.push((x as i64, y as i64, z as i64));
                while let Some((cx, cy, cz)) = stack.pop() {
                    size += 1;
                    for dz in -1..=1i64 {
                        for dy in -1..=1i64 {
                            for dx in -1..=1i64 {
                                if dx == 0 && dy == 0 && dz == 0 {
                                    continue;
                                }
                                let (nx, ny, nz) = (cx + dx, cy + dy, cz + dz);
                                if !glv.in_bounds(nx, ny, nz) {
                                    continue;
                                }
                                let ni = glv.index(nx as usize, ny as usize, nz as usize);
                                if !visited[ni] && glv.levels[ni] == level {
                                    visited[ni] = true;
                                    stack.push((nx, ny, nz));
                                }
                            }
                        }
                    }
                }
                out.push((level, size));
            }
        }
    }
    out
}

pub fn glszm_features(glv: &GreyLevelVolume) -> [f64; 16] {
    let zone_list = zones(glv);
    let nz = zone_list.len() as f64;
    if nz == 0.0 {
        return [0f64; 16];
    }
    let np = glv.n_roi as f64;

    let mut sae = 0.0;
    let mut lae = 0.0;
    let mut lglze = 0.0;
    let mut hglze = 0.0;
    let mut salgle = 0.0;
    let mut sahgle = 0.0;
    let mut lalgle = 0.0;
    let mut lahgle = 0.0;
    let mut mu_g = 0.0;
    let mut mu_s = 0.0;
    for &(level, size) in &zone_list {
        let g = level as f64;
        let s = size as f64;
        sae += 1.0 / (s * s);
        lae += s * s;
        lglze += 1.0 / (g * g);
        hglze += g * g;
        salgle += 1.0 / (g * g * s * s);
        sahgle += g * g / (s * s);
        lalgle += s * s / (g * g);
        lahgle += g * g * s * s;
        mu_g += g / nz;
        mu_s += s / nz;
    }
    let mut glv_var = 0.0;
    let mut zv = 0.0;
    for &(level, size) in &zone_list {
        glv_var += (level as f64 - mu_g).powi(2) / nz;
        zv += (size as f64 - mu_s).powi(2) / nz;
    }

    // Group zone counts per level and per size for the nonuniformities and
    // the entropy: P(i,s) = count of zones with that level and size / Nz.
    use std::collections::HashMap;
    let mut by_level: HashMap<u32, f64> = HashMap::new();
    let mut by_size: HashMap<usize, f64> = HashMap::new();
    let mut by_cell: HashMap<(u32, usize), f64> = HashMap::new();
    for &(level, size) in &zone_list {
        *by_level.entry(level).or_insert(0.0) += 1.0;
        *by_size.entry(size).or_insert(0.0) += 1.0;
        *by_cell.entry((level, size)).or_insert(0.0) += 1.0;
    }
    let gln: f64 = by_level.values().map(|&c| c * c).sum();
    let szn: f64 = by_size.values().map(|&c| c * c).sum();
    let ze: f64 = -by_cell
        .values()
        .map(|&c| {
            let p = c / nz;
            p * p.log2()
        })
        .sum::<f64>();

    [
        sae / nz,
        lae / nz,
        gln / nz,
        gln / (nz * nz),
        szn / nz,
        szn / (nz * nz),
        nz / np,
        glv_var,
        zv,
        ze,
        lglze / nz,
        hglze / nz,
        salgle / nz,
        sahgle / nz,
        lalgle / nz,
        lahgle / nz,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::discretize::{discretize, DiscretizationSpec};

    #[test]
    fn constant_roi_is_one_zone() {
        let values = vec![3.0f32; 27];
        let roi = vec![1u8; 27];
        let glv = discretize(&values, &roi, [3, 3, 3], &DiscretizationSpec { bin_count: 4 }).unwrap();
        let zs = zones(&glv);
        assert_eq!(zs, vec![(1, 27)]);
        let f = glszm_features(&glv);
        let idx = |n: &str| GLSZM_FEATURE_NAMES.iter().position(|&x| x == n).unwrap();
        assert_eq!(f[idx("zone_entropy")], 0.0);
        assert!((f[idx("zone_percentage")] - 1.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_voxels_are_26_connected() {
        // Two voxels sharing only a corner form one zone under
        // 26-connectivity.
        let mut values = vec![0.0f32; 8];
        let mut roi = vec![0u8; 8];
        values[0] = 5.0; // (0,0,0)
        values[7] = 5.0; // (1,1,1)
        roi[0] = 1;
        roi[7] = 1;
        let glv = discretize(&values, &roi, [2, 2, 2], &DiscretizationSpec { bin_count: 2 }).unwrap();
        let zs = zones(&glv);
        assert_eq!(zs.len(), 1);
        assert_eq!(zs[0].1, 2);
    }

    #[test]
    fn separate_levels_are_separate_zones() {
        let values = vec![0.0f32, 0.0, 9.0, 9.0];
        let roi = vec![1u8; 4];
        let glv = discretize(&values, &roi, [4, 1, 1], &DiscretizationSpec { bin_count: 2 }).unwrap();
        let mut zs = zones(&glv);
        zs.sort();
        assert_eq!(zs, vec![(1, 2), (2, 2)]);
    }
}
