//! Real-time augmentation: one transform draw applied identically to the
//! paired PET and CT patches so their voxelwise alignment survives.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    Off,
    /// Uniform angle in [0, 2pi) about the longitudinal (z) axis with
    /// trilinear resampling.
    #[default]
    Arbitrary,
    /// Multiples of 90 degrees (exact, no resampling error).
    RightAngle,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub enabled: bool,
    /// Maximum integer translation per axis, voxels.
    pub max_translate: i64,
    pub rotation: RotationMode,
    pub flips: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            enabled: true,
            max_translate: 8,
            rotation: RotationMode::Arbitrary,
            flips: true,
        }
    }
}

/// Flat x-fastest indexing (same layout as patches).
#[inline]
fn at(data: &[f32], dims: [usize; 3], x: i64, y: i64, z: i64) -> f32 {
    if x < 0
        || y < 0
        || z < 0
        || x as usize >= dims[0]
        || y as usize >= dims[1]
        || z as usize >= dims[2]
    {
        0.0
    } else {
        data[(z as usize * dims[1] + y as usize) * dims[0] + x as usize]
    }
}

/// Integer translation with zero fill.
pub fn translate(data: &[f32], dims: [usize; 3], shift: [i64; 3]) -> Vec<f32> {
    let mut out = vec![0.0; data.len()];
    for z in 0..dims[2] as i64 {
        for y in 0..dims[1] as i64 {
            for x in 0..dims[0] as i64 {
                let v = at(data, dims, x - shift[0], y - shift[1], z - shift[2]);
                out[(z as usize * dims[1] + y as usize) * dims[0] + x as usize] = v;
            }
        }
    }
    out
}

/// Rotation about the z axis by `angle` radians around the patch center,
/// trilinear (here: bilinear in-plane) resampling with zero fill.
pub fn rotate_z(data: &[f32], dims: [usize; 3], angle: f64) -> Vec<f32> {
    let mut out = vec![0.0; data.len()];
    let cx = (dims[0] - 1) as f64 / 2.0;
    let cy = (dims[1] - 1) as f64 / 2.0;
    let (sin, cos) = angle.sin_cos();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                // Inverse mapping: sample the source at the rotated position.
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                let sx = cos * dx + sin * dy + cx;
                let sy = -sin * dx + cos * dy + cy;
                if sx < -0.5 || sy < -0.5 || sx > dims[0] as f64 - 0.5 || sy > dims[1] as f64 - 0.5
                {
                    continue;
                }
                let x0 = sx.floor();
                let y0 = sy.floor();
                let tx = sx - x0;
                let ty = sy - y0;
                let mut acc = 0.0f64;
                for (oy, wy) in [(0i64, 1.0 - ty), (1, ty)] {
                    for (ox, wx) in [(0i64, 1.0 - tx), (1, tx)] {
                        let v = at(data, dims, x0 as i64 + ox, y0 as i64 + oy, z as i64);
                        acc += wx * wy * v as f64;
                    }
                }
                out[(z * dims[1] + y) * dims[0] + x] = acc as f32;
            }
        }
    }
    out
}

pub fn flip_axis(data: &[f32], dims: [usize; 3], axis: usize) -> Vec<f32> {
    let mut out = vec![0.0; data.len()];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let mut src = [x, y, z];
                src[axis] = dims[axis] - 1 - src[axis];
                out[(z * dims[1] + y) * dims[0] + x] =
                    data[(src[2] * dims[1] + src[1]) * dims[0] + src[0]];
            }
        }
    }
    out
}

/// One augmentation draw, applied identically to both patches. Order:
/// rotate about z, translate, then flips.
pub fn augment(
    pet: &[f32],
    ct: &[f32],
    dims: [usize; 3],
    config: &AugmentConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<f32>, Vec<f32>) {
    if !config.enabled {
        return (pet.to_vec(), ct.to_vec());
    }
    let mut a = pet.to_vec();
    let mut b = ct.to_vec();

    match config.rotation {
        RotationMode::Off => {}
        RotationMode::Arbitrary => {
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            a = rotate_z(&a, dims, angle);
            b = rotate_z(&b, dims, angle);
        }
        RotationMode::RightAngle => {
            let quarter = rng.random_range(0..4u32);
            let angle = f64::from(quarter) * std::f64::consts::FRAC_PI_2;
            if quarter != 0 {
                a = rotate_z(&a, dims, angle);
                b = rotate_z(&b, dims, angle);
            }
        }
    }

    if config.max_translate > 0 {
        let m = config.max_translate;
        let shift = [
            rng.random_range(-m..=m),
            rng.random_range(-m..=m),
            rng.random_range(-m..=m),
        ];
        if shift != [0, 0, 0] {
            a = translate(&a, dims, shift);
            b = translate(&b, dims, shift);
        }
    }

    if config.flips {
        for axis in 0..3 {
            if rng.random::<f64>() < 0.5 {
                a = flip_axis(&a, dims, axis);
                b = flip_axis(&b, dims, axis);
            }
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn ramp(dims: [usize; 3]) -> Vec<f32> {
        (0..dims[0] * dims[1] * dims[2]).map(|i| i as f32).collect()
    }

    #[test]
    fn disabled_config_is_identity() {
        let dims = [6, 6, 4];
        let pet = ramp(dims);
        let ct: Vec<f32> = pet.iter().map(|v| v * 2.0).collect();
        let cfg = AugmentConfig {
            enabled: false,
            ..Default::default()
        };
        let mut rng = stream(1, "aug", &[0]);
        let (a, b) = augment(&pet, &ct, dims, &cfg, &mut rng);
        assert_eq!(a, pet);
        assert_eq!(b, ct);
    }

    #[test]
    fn identity_draws_leave_patches_unchanged() {
        // Rotation off, zero max translation, flips off: no transform can
        // trigger, whatever the rng yields.
        let dims = [5, 5, 3];
        let pet = ramp(dims);
        let cfg = AugmentConfig {
            enabled: true,
            max_translate: 0,
            rotation: RotationMode::Off,
            flips: false,
        };
        let mut rng = stream(2, "aug", &[1]);
        let (a, _) = augment(&pet, &pet, dims, &cfg, &mut rng);
        assert_eq!(a, pet);
    }

    #[test]
    fn shift_then_unshift_recovers_interior() {
        let dims = [24, 24, 24];
        let mut data = vec![0.0f32; 24 * 24 * 24];
        // Content well away from the borders.
        for z in 10..14 {
            for y in 10..14 {
                for x in 10..14 {
                    data[(z * 24 + y) * 24 + x] = (x + y + z) as f32;
                }
            }
        }
        let shifted = translate(&data, dims, [8, 0, 0]);
        let back = translate(&shifted, dims, [-8, 0, 0]);
        assert_eq!(back, data);
    }

    #[test]
    fn same_stream_gives_identical_pairs() {
        let dims = [8, 8, 8];
        let pet = ramp(dims);
        let ct: Vec<f32> = pet.iter().map(|v| v + 1.0).collect();
        let cfg = AugmentConfig::default();
        let (a1, b1) = augment(&pet, &ct, dims, &cfg, &mut stream(9, "aug", &[4]));
        let (a2, b2) = augment(&pet, &ct, dims, &cfg, &mut stream(9, "aug", &[4]));
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
    }

    #[test]
    fn double_flip_is_identity() {
        let dims = [5, 4, 3];
        let data = ramp(dims);
        for axis in 0..3 {
            let once = flip_axis(&data, dims, axis);
            let twice = flip_axis(&once, dims, axis);
            assert_eq!(twice, data);
        }
    }

    #[test]
    fn quarter_rotation_is_exact_on_square_planes() {
        // 90-degree rotation of a square plane permutes voxels exactly.
        let dims = [4, 4, 1];
        let data: Vec<f32> = (0..16).map(|i| i as f32).collect();
        let rot = rotate_z(&data, dims, std::f64::consts::FRAC_PI_2);
        // Rotating four times returns the original.
        let mut cur = data.clone();
        for _ in 0..4 {
            cur = rotate_z(&cur, dims, std::f64::consts::FRAC_PI_2);
        }
        for (a, b) in cur.iter().zip(data.iter()) {
            assert!((a - b).abs() < 1e-5);
        }
        // And a single quarter turn moved some voxel.
        assert_ne!(rot, data);
    }
}
