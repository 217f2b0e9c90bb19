//! Grey-level run-length matrix features.
//!
//! A run is a maximal collinear segment of equal-level ROI voxels along one
//! of the 13 directions. Features are computed per direction and averaged.

use super::discretize::{GreyLevelVolume, DIRECTIONS_13};

pub const GLRLM_FEATURE_NAMES: [&str; 16] = [
    "short_run_emphasis",
    "long_run_emphasis",
    "gray_level_nonuniformity",
    "gray_level_nonuniformity_normalized",
    "run_length_nonuniformity",
    "run_length_nonuniformity_normalized",
    "run_percentage",
    "gray_level_variance",
    "run_variance",
    "run_entropy",
    "low_gray_level_run_emphasis",
    "high_gray_level_run_emphasis",
    "short_run_low_gray_level_emphasis",
    "short_run_high_gray_level_emphasis",
    "long_run_low_gray_level_emphasis",
    "long_run_high_gray_level_emphasis",
];

/// Run-length matrix for one direction: entry [level-1][length-1] counts
/// maximal runs of that level and length.
pub fn run_length_matrix(glv: &GreyLevelVolume, dir: [i64; 3]) -> Vec<Vec<f64>> {
    let ng = glv.ng as usize;
    let max_len = *glv.dims.iter().max().unwrap();
    let mut matrix = vec![vec![0f64; max_len]; ng];
    let (lo, hi) = glv.bbox;
    for z in lo[2]..=hi[2] {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let level = glv.level_at(x, y, z);
                if level == 0 {
                    continue;
                }
                // Only start counting at the head of a run.
                let px = x as i64 - dir[0];
                let py = y as i64 - dir[1];
                let pz = z as i64 - dir[2];
                if glv.in_bounds(px, py, pz)
                    && glv.level_at(px as usize, py as usize, pz as usize) == level
                {
                    continue;
                }
                let mut len = 1usize;
                let (mut cx, mut cy, mut cz) = (x as i64 + dir[0], y as i64 + dir[1], z as i64 + dir[2]);
                while glv.in_bounds(cx, cy, cz)
                    && glv.level_at(cx as usize, cy as usize, cz as usize) == level
                {
                    len += 1;
                    cx += dir[0];
                    cy += dir[1];
                    cz += dir[2];
                }
                matrix[(level - 1) as usize][len - 1] += 1.0;
            }
        }
    }
    matrix
}

fn matrix_features(matrix: &[Vec<f64>], n_roi: usize) -> Option<[f64; 16]> {
    let nr: f64 = matrix.iter().map(|row| row.iter().sum::<f64>()).sum();
    if nr <= 0.0 {
        return None;
    }
    let ng = matrix.len();
    let max_len = matrix[0].len();

    let mut sre = 0.0;
    let mut lre = 0.0;
    let mut lglre = 0.0;
    let mut hglre = 0.0;
    let mut srlgle = 0.0;
    let mut srhgle = 0.0;
    let mut lrlgle = 0.0;
    let mut lrhgle = 0.0;
    let mut re = 0.0;
    let mut mu_g = 0.0;
    let mut mu_l = 0.0;
    for (gi, row) in matrix.iter().enumerate() {
        let g = (gi + 1) as f64;
        for (li, &c) in row.iter().enumerate() {
            if c <= 0.0 {
                continue;
            }
            let l = (li + 1) as f64;
            sre += c / (l * l);
            lre += c * l * l;
            lglre += c / (g * g);
            hglre += c * g * g;
            srlgle += c / (g * g * l * l);
            srhgle += c * g * g / (l * l);
            lrlgle += c * l * l / (g * g);
            lrhgle += c * g * g * l * l;
            let p = c / nr;
            re -= p * p.log2();
            mu_g += g * p;
            mu_l += l * p;
        }
    }
    let mut glv_var = 0.0;
    let mut rv = 0.0;
    for (gi, row) in matrix.iter().enumerate() {
        let g = (gi + 1) as f64;
        for (li, &c) in row.iter().enumerate() {
            if c <= 0.0 {
                continue;
            }
            let l = (li + 1) as f64;
            let p = c / nr;
            glv_var += (g - mu_g).powi(2) * p;
            rv += (l - mu_l).powi(2) * p;
        }
    }
    let mut gln = 0.0;
    for row in matrix.iter() {
        let s: f64 = row.iter().sum();
        gln += s * s;
    }
    let mut rln = 0.0;
    for li in 0..max_len {
        let s: f64 = (0..ng).map(|gi| matrix[gi][li]).sum();
        rln += s * s;
    }

    Some([
        sre / nr,
        lre / nr,
        gln / nr,
        gln / (nr * nr),
        rln / nr,
        rln / (nr * nr),
        nr / n_roi as f64,
        glv_var,
        rv,
        re,
        lglre / nr,
        hglre / nr,
        srlgle / nr,
        srhgle / nr,
        lrlgle / nr,
        lrhgle / nr,
    ])
}

/// Direction-averaged GLRLM features.
pub fn glrlm_features(glv: &GreyLevelVolume) -> [f64; 16] {
    let mut acc = [0f64; 16];
    let mut n_dirs = 0usize;
    for dir in DIRECTIONS_13 {
        let matrix = run_length_matrix(glv, dir);
        if let Some(f) = matrix_features(&matrix, glv.n_roi) {
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
    }
    acc
}
