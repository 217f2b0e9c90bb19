//! 3D shape descriptors of the binary tumor mask at 1 mm isotropic spacing.
//!
//! Surface area counts exposed voxel faces (not a mesh); diameters measure
//! distances between voxel centers restricted to boundary voxels; axis
//! lengths come from the eigenvalues of the voxel-coordinate covariance.

use crate::error::{CoreError, Result};

pub const SHAPE_FEATURE_NAMES: [&str; 16] = [
    "voxel_volume",
    "surface_area",
    "surface_volume_ratio",
    "sphericity",
    "compactness1",
    "compactness2",
    "spherical_disproportion",
    "max_3d_diameter",
    "max_2d_diameter_slice",
    "max_2d_diameter_column",
    "max_2d_diameter_row",
    "major_axis_length",
    "minor_axis_length",
    "least_axis_length",
    "elongation",
    "flatness",
];

const FACE_NEIGHBORS: [[i64; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

/// Jacobi eigenvalues of a symmetric 3x3 matrix, descending.
fn sym3_eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let mut a = m;
    for _ in 0..64 {
        // Largest off-diagonal element.
        let mut p = 0;
        let mut q = 1;
        let mut max = a[0][1].abs();
        if a[0][2].abs() > max {
            p = 0;
            q = 2;
            max = a[0][2].abs();
        }
        if a[1][2].abs() > max {
            p = 1;
            q = 2;
            max = a[1][2].abs();
        }
        if max < 1e-15 {
            break;
        }
        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let mut b = a;
        for k in 0..3 {
            b[p][k] = c * a[p][k] - s * a[q][k];
            b[q][k] = s * a[p][k] + c * a[q][k];
        }
        let tmp = b;
        for k in 0..3 {
            b[k][p] = c * tmp[k][p] - s * tmp[k][q];
            b[k][q] = s * tmp[k][p] + c * tmp[k][q];
        }
        a = b;
    }
    let mut eig = [a[0][0], a[1][1], a[2][2]];
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    // Clamp tiny negative values from roundoff.
    for e in eig.iter_mut() {
        if *e < 0.0 {
            *e = 0.0;
        }
    }
    eig
}

fn max_pairwise_sq(points: &[[f64; 3]], keep: [bool; 3]) -> f64 {
    let mut best = 0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let mut d = 0.0;
            for a in 0..3 {
                if keep[a] {
                    let dd = points[i][a] - points[j][a];
                    d += dd * dd;
                }
            }
            best = best.max(d);
        }
    }
    best
}

/// `mask` is a flat x-fastest binary array over `dims`, assumed to be at
/// 1 mm isotropic spacing.
pub fn shape_features(mask: &[u8], dims: [usize; 3]) -> Result<[f64; 16]> {
    assert_eq!(mask.len(), dims[0] * dims[1] * dims[2]);
    let idx = |x: usize, y: usize, z: usize| (z * dims[1] + y) * dims[0] + x;
    let in_bounds = |x: i64, y: i64, z: i64| {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < dims[0]
            && (y as usize) < dims[1]
            && (z as usize) < dims[2]
    };

    let mut volume = 0f64;
    let mut surface = 0f64;
    let mut centroid = [0f64; 3];
    let mut boundary: Vec<[f64; 3]> = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                if mask[idx(x, y, z)] == 0 {
                    continue;
                }
                volume += 1.0;
                centroid[0] += x as f64;
                centroid[1] += y as f64;
                centroid[2] += z as f64;
                let mut exposed = 0usize;
                for d in FACE_NEIGHBORS {
                    let (nx, ny, nz) = (x as i64 + d[0], y as i64 + d[1], z as i64 + d[2]);
                    if !in_bounds(nx, ny, nz) || mask[idx(nx as usize, ny as usize, nz as usize)] == 0
                    {
                        exposed += 1;
                    }
                }
                surface += exposed as f64;
                if exposed > 0 {
                    boundary.push([x as f64, y as f64, z as f64]);
                }
            }
        }
    }
    if volume == 0.0 {
        return Err(CoreError::EmptyMask);
    }
    for c in centroid.iter_mut() {
        *c /= volume;
    }

    // Covariance of voxel center coordinates (population).
    let mut cov = [[0f64; 3]; 3];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                if mask[idx(x, y, z)] == 0 {
                    continue;
                }
                let d = [
                    x as f64 - centroid[0],
                    y as f64 - centroid[1],
                    z as f64 - centroid[2],
                ];
                for a in 0..3 {
                    for b in 0..3 {
                        cov[a][b] += d[a] * d[b];
                    }
                }
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= volume;
        }
    }
    let eig = sym3_eigenvalues(cov);
    let major = 4.0 * eig[0].sqrt();
    let minor = 4.0 * eig[1].sqrt();
    let least = 4.0 * eig[2].sqrt();
    let (elongation, flatness) = if eig[0] > 0.0 {
        ((eig[1] / eig[0]).sqrt(), (eig[2] / eig[0]).sqrt())
    } else {
        (1.0, 1.0) // single voxel and other fully degenerate masks
    };

    let pi = std::f64::consts::PI;
    let sphericity = pi.powf(1.0 / 3.0) * (6.0 * volume).powf(2.0 / 3.0) / surface;
    let compactness1 = volume / (pi.sqrt() * surface.powf(1.5));
    let compactness2 = 36.0 * pi * volume * volume / surface.powi(3);
    let equivalent_radius = (3.0 * volume / (4.0 * pi)).powf(1.0 / 3.0);
    let spherical_disproportion = surface / (4.0 * pi * equivalent_radius * equivalent_radius);

    let max3d = max_pairwise_sq(&boundary, [true, true, true]).sqrt();
    // Slice = within an xy-plane (fixed z), column = xz-plane (fixed y),
    // row = yz-plane (fixed x).
    let mut slice_best = 0f64;
    let mut column_best = 0f64;
    let mut row_best = 0f64;
    {
        use std::collections::HashMap;
        let mut by_z: HashMap<i64, Vec<[f64; 3]>> = HashMap::new();
        let mut by_y: HashMap<i64, Vec<[f64; 3]>> = HashMap::new();
        let mut by_x: HashMap<i64, Vec<[f64; 3]>> = HashMap::new();
        for p in &boundary {
            by_z.entry(p[2] as i64).or_default().push(*p);
            by_y.entry(p[1] as i64).or_default().push(*p);
            by_x.entry(p[0] as i64).or_default().push(*p);
        }
        for pts in by_z.values() {
            slice_best = slice_best.max(max_pairwise_sq(pts, [true, true, false]));
        }
        for pts in by_y.values() {
            column_best = column_best.max(max_pairwise_sq(pts, [true, false, true]));
        }
        for pts in by_x.values() {
            row_best = row_best.max(max_pairwise_sq(pts, [false, true, true]));
        }
    }

    Ok([
        volume,
        surface,
        surface / volume,
        sphericity,
        compactness1,
        compactness2,
        spherical_disproportion,
        max3d,
        slice_best.sqrt(),
        column_best.sqrt(),
        row_best.sqrt(),
        major,
        minor,
        least,
        elongation,
        flatness,
    ])
}
