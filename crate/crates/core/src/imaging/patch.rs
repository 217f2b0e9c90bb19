//! ROI extraction: voxelwise masking, centroid-centered crop, and intensity
//! normalization to [0,1].

use super::{Modality, Volume3D};
use crate::error::{CoreError, Result};
use crate::stats::percentile_linear;

/// A cropped, masked patch. Voxels outside the ROI are exactly zero; the
/// ROI membership itself travels with the patch so normalization statistics
/// can be computed over tumor voxels only.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub dims: [usize; 3],
    pub voxels: Vec<f32>,
    /// 1 inside the ROI, 0 outside. Same layout as `voxels`.
    pub roi: Vec<u8>,
    pub modality: Modality,
    /// Crop window start in the source volume, in voxels (may be negative
    /// when the window extends past the volume and was zero-filled).
    pub offset: [i64; 3],
}

impl Patch {
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    pub fn roi_count(&self) -> usize {
        self.roi.iter().filter(|&&m| m != 0).count()
    }

    pub fn roi_values(&self) -> Vec<f64> {
        self.voxels
            .iter()
            .zip(self.roi.iter())
            .filter(|(_, &m)| m != 0)
            .map(|(&v, _)| v as f64)
            .collect()
    }

    /// View the patch as a unit-spacing volume (for persistence).
    pub fn to_volume(&self, modality: Modality) -> Volume3D {
        Volume3D {
            dims: self.dims,
            spacing: [1.0, 1.0, 1.0],
            origin: [
                self.offset[0] as f64,
                self.offset[1] as f64,
                self.offset[2] as f64,
            ],
            modality,
            voxels: self.voxels.clone(),
        }
    }

    /// Rebuild a patch from persisted image + ROI volumes.
    pub fn from_volumes(image: &Volume3D, roi: &Volume3D) -> Result<Self> {
        if image.dims != roi.dims {
            return Err(CoreError::GeometryMismatch(format!(
                "patch image dims {:?} vs roi dims {:?}",
                image.dims, roi.dims
            )));
        }
        Ok(Patch {
            dims: image.dims,
            voxels: image.voxels.clone(),
            roi: roi.voxels.iter().map(|&v| v as u8).collect(),
            modality: image.modality,
            offset: [
                image.origin[0].round() as i64,
                image.origin[1].round() as i64,
                image.origin[2].round() as i64,
            ],
        })
    }
}

/// Round half away from zero (round-half-up for the non-negative centroids
/// that occur here).
fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// Multiply `vol` by the binary `mask` and crop a `patch_dims` window
/// centered at the mask centroid (rounded per axis). The window is
/// zero-filled where it extends past the volume.
///
/// Errors if the mask is empty or any tumor voxel falls outside the crop
/// window (the tumor must be fully covered, never silently truncated).
pub fn mask_and_crop(vol: &Volume3D, mask: &Volume3D, patch_dims: [usize; 3]) -> Result<Patch> {
    if vol.dims != mask.dims {
        return Err(CoreError::GeometryMismatch(format!(
            "volume dims {:?} vs mask dims {:?}",
            vol.dims, mask.dims
        )));
    }
    if !mask.modality.is_mask() {
        return Err(CoreError::InvalidVolume(
            "mask_and_crop: second argument must be a MASK volume".into(),
        ));
    }

    // Centroid of nonzero mask voxels.
    let mut count = 0usize;
    let mut sum = [0f64; 3];
    for z in 0..vol.dims[2] {
        for y in 0..vol.dims[1] {
            for x in 0..vol.dims[0] {
                if mask.at(x, y, z) != 0.0 {
                    count += 1;
                    sum[0] += x as f64;
                    sum[1] += y as f64;
                    sum[2] += z as f64;
                }
            }
        }
    }
    if count == 0 {
        return Err(CoreError::EmptyMask);
    }
    let centroid = [
        round_half_up(sum[0] / count as f64),
        round_half_up(sum[1] / count as f64),
        round_half_up(sum[2] / count as f64),
    ];
    let start = [
        centroid[0] - (patch_dims[0] / 2) as i64,
        centroid[1] - (patch_dims[1] / 2) as i64,
        centroid[2] - (patch_dims[2] / 2) as i64,
    ];

    let mut patch = Patch {
        dims: patch_dims,
        voxels: vec![0.0; patch_dims[0] * patch_dims[1] * patch_dims[2]],
        roi: vec![0; patch_dims[0] * patch_dims[1] * patch_dims[2]],
        modality: vol.modality,
        offset: start,
    };

    let mut covered = 0usize;
    for pz in 0..patch_dims[2] {
        let sz = start[2] + pz as i64;
        if sz < 0 || sz as usize >= vol.dims[2] {
            continue;
        }
        for py in 0..patch_dims[1] {
            let sy = start[1] + py as i64;
            if sy < 0 || sy as usize >= vol.dims[1] {
                continue;
            }
            for px in 0..patch_dims[0] {
                let sx = start[0] + px as i64;
                if sx < 0 || sx as usize >= vol.dims[0] {
                    continue;
                }
                let m = mask.at(sx as usize, sy as usize, sz as usize);
                if m != 0.0 {
                    let i = patch.index(px, py, pz);
                    patch.voxels[i] = vol.at(sx as usize, sy as usize, sz as usize);
                    patch.roi[i] = 1;
                    covered += 1;
                }
            }
        }
    }
    if covered != count {
        return Err(CoreError::TumorExceedsPatch {
            patch_dims,
            detail: format!(
                "{} of {} tumor voxels fall outside the crop window starting at {:?}",
                count - covered,
                count,
                start
            ),
        });
    }
    Ok(patch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizeMode {
    /// Clip at the `lo_pct` / `hi_pct` percentiles of the ROI intensities.
    #[default]
    Percentile,
    /// Literal scaling: clip at 0.95*min and 0.95*max of the ROI.
    ScaledExtrema,
}

/// Map ROI voxels to [0,1] by `clamp((v - lo) / (hi - lo), 0, 1)`.
/// Background stays exactly 0. A degenerate span (hi == lo) maps every ROI
/// voxel to 1.
pub fn clip_normalize(patch: &Patch, lo_pct: f64, hi_pct: f64, mode: NormalizeMode) -> Result<Patch> {
    let mut roi_vals = patch.roi_values();
    if roi_vals.is_empty() {
        return Err(CoreError::EmptyRoi);
    }
    if !(0.0..=100.0).contains(&lo_pct) || !(0.0..=100.0).contains(&hi_pct) || lo_pct > hi_pct {
        return Err(CoreError::InvalidParameter(format!(
            "percentile bounds ({lo_pct}, {hi_pct}) invalid"
        )));
    }
    roi_vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = match mode {
        NormalizeMode::Percentile => (
            percentile_linear(&roi_vals, lo_pct),
            percentile_linear(&roi_vals, hi_pct),
        ),
        NormalizeMode::ScaledExtrema => (
            0.95 * roi_vals[0],
            0.95 * roi_vals[roi_vals.len() - 1],
        ),
    };
    let span = hi - lo;
    let mut out = patch.clone();
    for (v, &m) in out.voxels.iter_mut().zip(out.roi.iter()) {
        if m == 0 {
            *v = 0.0;
            continue;
        }
        *v = if span <= 0.0 {
            1.0
        } else {
            (((*v as f64) - lo) / span).clamp(0.0, 1.0) as f32
        };
    }
    Ok(out)
}
