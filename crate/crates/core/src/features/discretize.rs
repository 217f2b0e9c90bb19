//! Intensity discretization into grey levels 1..=Ng over the ROI.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationSpec {
    /// Number of bins over the ROI min..max range.
    pub bin_count: u32,
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        DiscretizationSpec { bin_count: 64 }
    }
}

/// Discretized intensities: level 0 marks background, ROI voxels carry
/// levels in 1..=Ng.
#[derive(Debug, Clone)]
pub struct GreyLevelVolume {
    pub dims: [usize; 3],
    pub levels: Vec<u32>,
    /// Configured bin count (levels actually present may be fewer).
    pub ng: u32,
    pub n_roi: usize,
    /// Inclusive ROI bounding box (lo, hi) per axis; valid when n_roi > 0.
    pub bbox: ([usize; 3], [usize; 3]),
}

impl GreyLevelVolume {
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    #[inline]
    pub fn level_at(&self, x: usize, y: usize, z: usize) -> u32 {
        self.levels[self.index(x, y, z)]
    }

    #[inline]
    pub fn in_bounds(&self, x: i64, y: i64, z: i64) -> bool {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < self.dims[0]
            && (y as usize) < self.dims[1]
            && (z as usize) < self.dims[2]
    }

    /// Sorted distinct levels present in the ROI.
    pub fn present_levels(&self) -> Vec<u32> {
        let mut seen = vec![false; self.ng as usize + 1];
        for &l in &self.levels {
            if l > 0 {
                seen[l as usize] = true;
            }
        }
        (1..=self.ng).filter(|&l| seen[l as usize]).collect()
    }

    /// Histogram over levels 1..=Ng (index 0 unused).
    pub fn histogram(&self) -> Vec<usize> {
        let mut hist = vec![0usize; self.ng as usize + 1];
        for &l in &self.levels {
            if l > 0 {
                hist[l as usize] += 1;
            }
        }
        hist
    }
}

/// `level(v) = min(Ng, 1 + floor(Ng * (v - min) / (max - min)))`; a constant
/// ROI maps every voxel to level 1.
pub fn discretize(
    values: &[f32],
    roi: &[u8],
    dims: [usize; 3],
    spec: &DiscretizationSpec,
) -> Result<GreyLevelVolume> {
    if spec.bin_count < 2 {
        return Err(CoreError::InvalidParameter(format!(
            "bin_count must be >= 2, got {}",
            spec.bin_count
        )));
    }
    assert_eq!(values.len(), roi.len());
    assert_eq!(values.len(), dims[0] * dims[1] * dims[2]);

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut n_roi = 0usize;
    for (&v, &m) in values.iter().zip(roi.iter()) {
        if m != 0 {
            n_roi += 1;
            min = min.min(v as f64);
            max = max.max(v as f64);
        }
    }
    if n_roi == 0 {
        return Err(CoreError::EmptyRoi);
    }

    let ng = spec.bin_count;
    let range = max - min;
    let mut levels = vec![0u32; values.len()];
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let i = (z * dims[1] + y) * dims[0] + x;
                if roi[i] == 0 {
                    continue;
                }
                levels[i] = if range <= 0.0 {
                    1
                } else {
                    let raw = 1 + ((ng as f64) * ((values[i] as f64) - min) / range).floor() as u32;
                    raw.min(ng)
                };
                lo[0] = lo[0].min(x);
                lo[1] = lo[1].min(y);
                lo[2] = lo[2].min(z);
                hi[0] = hi[0].max(x);
                hi[1] = hi[1].max(y);
                hi[2] = hi[2].max(z);
            }
        }
    }
    Ok(GreyLevelVolume {
        dims,
        levels,
        ng,
        n_roi,
        bbox: (lo, hi),
    })
}

/// The 13 unique 3D direction offsets at distance 1 (one per pair of
/// opposite neighbors in the 26-neighborhood).
pub const DIRECTIONS_13: [[i64; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [1, -1, -1],
];
