//! Handcrafted radiomics features.
//!
//! Per modality (PET-SUV, CT) and per image setting (original + 8 wavelet
//! sub-bands): 19 first-order + 24 GLCM + 16 GLRLM + 16 GLSZM + 5 NGTDM
//! = 80 features, plus 16 shape features from the mask once:
//! 2 * 9 * 80 + 16 = 1456.

pub mod discretize;
pub mod fos;
pub mod glcm;
pub mod glrlm;
pub mod glszm;
mod matrix;
pub mod ngtdm;
pub mod shape;
pub mod wavelet;

pub use discretize::{discretize, DiscretizationSpec, GreyLevelVolume, DIRECTIONS_13};
pub use fos::{fos_features, FOS_FEATURE_NAMES};
pub use glcm::{glcm_features, GLCM_FEATURE_NAMES};
pub use glrlm::{glrlm_features, GLRLM_FEATURE_NAMES};
pub use glszm::{glszm_features, GLSZM_FEATURE_NAMES};
pub use matrix::FeatureMatrix;
pub use ngtdm::{ngtdm_features, NGTDM_FEATURE_NAMES};
pub use shape::{shape_features, SHAPE_FEATURE_NAMES};
pub use wavelet::{wavelet_decompose, wavelet_reconstruct, WaveletFamily, SUBBAND_NAMES};

use crate::error::{CoreError, Result};
use crate::study::PreprocessedStudy;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

pub const FEATURE_COUNT: usize = 1456;
const SETTINGS: usize = 9; // original + 8 sub-bands
const PER_SETTING: usize = 19 + 24 + 16 + 16 + 5;

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub discretization: DiscretizationSpec,
    pub wavelet: WaveletFamily,
}

/// The fixed, ordered roster of all 1456 feature names.
pub fn feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = Vec::with_capacity(FEATURE_COUNT);
        for modality in ["pet", "ct"] {
            for setting in std::iter::once("orig").chain(SUBBAND_NAMES.iter().copied()) {
                for f in FOS_FEATURE_NAMES {
                    names.push(format!("{modality}_{setting}_fos_{f}"));
                }
                for f in GLCM_FEATURE_NAMES {
                    names.push(format!("{modality}_{setting}_glcm_{f}"));
                }
                for f in GLRLM_FEATURE_NAMES {
                    names.push(format!("{modality}_{setting}_glrlm_{f}"));
                }
                for f in GLSZM_FEATURE_NAMES {
                    names.push(format!("{modality}_{setting}_glszm_{f}"));
                }
                for f in NGTDM_FEATURE_NAMES {
                    names.push(format!("{modality}_{setting}_ngtdm_{f}"));
                }
            }
        }
        for f in SHAPE_FEATURE_NAMES {
            names.push(format!("shape_{f}"));
        }
        assert_eq!(names.len(), 2 * SETTINGS * PER_SETTING + SHAPE_FEATURE_NAMES.len());
        assert_eq!(names.len(), FEATURE_COUNT);
        names
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        feature_names()
            .iter()
            .map(|s| s.as_str())
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_names()
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

/// All 80 per-setting features for one (values, roi, dims) triple.
fn setting_features(
    values: &[f32],
    roi: &[u8],
    dims: [usize; 3],
    voxel_volume: f64,
    config: &FeatureConfig,
    out: &mut Vec<f64>,
) -> Result<()> {
    let glv = discretize(values, roi, dims, &config.discretization)?;
    let roi_values: Vec<f64> = values
        .iter()
        .zip(roi.iter())
        .filter(|(_, &m)| m != 0)
        .map(|(&v, _)| v as f64)
        .collect();
    out.extend(fos_features(&roi_values, &glv, voxel_volume));
    out.extend(glcm_features(&glv));
    out.extend(glrlm_features(&glv));
    out.extend(glszm_features(&glv));
    out.extend(ngtdm_features(&glv));
    Ok(())
}

/// Nearest-neighbor decimation of the ROI by factor 2 per axis, aligned
/// with the wavelet sub-band grid (index 2i, edge-replicated like padding).
fn decimate_roi(roi: &[u8], dims: [usize; 3], half: [usize; 3]) -> Vec<u8> {
    let mut out = vec![0u8; half[0] * half[1] * half[2]];
    for z in 0..half[2] {
        let sz = (2 * z).min(dims[2] - 1);
        for y in 0..half[1] {
            let sy = (2 * y).min(dims[1] - 1);
            for x in 0..half[0] {
                let sx = (2 * x).min(dims[0] - 1);
                out[(z * half[1] + y) * half[0] + x] =
                    roi[(sz * dims[1] + sy) * dims[0] + sx];
            }
        }
    }
    out
}

/// Extract the full 1456-entry vector from a preprocessed study.
/// Deterministic; ordering matches [`feature_names`].
pub fn extract_all(study: &PreprocessedStudy, config: &FeatureConfig) -> Result<FeatureVector> {
    if study.pet.dims != study.ct.dims {
        return Err(CoreError::GeometryMismatch(format!(
            "pet patch {:?} vs ct patch {:?}",
            study.pet.dims, study.ct.dims
        )));
    }
    if study.pet.roi != study.ct.roi {
        return Err(CoreError::GeometryMismatch(
            "pet and ct patches carry different ROIs".into(),
        ));
    }
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    for patch in [&study.pet, &study.ct] {
        let dims = patch.dims;
        // Original setting at 1 mm voxels.
        setting_features(&patch.voxels, &patch.roi, dims, 1.0, config, &mut values)?;

        // Wavelet sub-bands; each setting re-discretized independently.
        let data: Vec<f64> = patch.voxels.iter().map(|&v| v as f64).collect();
        let bands = wavelet_decompose(&data, dims, config.wavelet)?;
        for (_, band, bdims) in &bands {
            let roi_sub = decimate_roi(&patch.roi, dims, *bdims);
            if roi_sub.iter().all(|&m| m == 0) {
                return Err(CoreError::EmptyRoi);
            }
            let band_f32: Vec<f32> = band.iter().map(|&v| v as f32).collect();
            // Sub-band voxels span 2 mm per axis.
            setting_features(&band_f32, &roi_sub, *bdims, 8.0, config, &mut values)?;
        }
    }
    values.extend(shape_features(&study.pet.roi, study.pet.dims)?);
    debug_assert_eq!(values.len(), FEATURE_COUNT);
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(CoreError::FeatureMatrix(format!(
            "non-finite feature value {bad} for study {}",
            study.id
        )));
    }
    Ok(FeatureVector { values })
}

/// Batch extraction across studies, parallel with deterministic row order.
pub fn extract_cohort(
    studies: &[PreprocessedStudy],
    config: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let rows: Result<Vec<FeatureVector>> = studies
        .par_iter()
        .map(|s| extract_all(s, config))
        .collect();
    let rows = rows?;
    FeatureMatrix::from_rows(
        studies.iter().map(|s| s.id.clone()).collect(),
        rows,
        studies.iter().map(|s| s.label).collect(),
        studies.iter().map(|s| s.tnm_stage.encoded()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_roster_shape() {
        let names = feature_names();
        assert_eq!(names.len(), 1456);
        assert_eq!(names[0], "pet_orig_fos_energy");
        assert_eq!(names[19], "pet_orig_glcm_autocorrelation");
        assert_eq!(names[80], "pet_wLLL_fos_energy");
        assert_eq!(names[720], "ct_orig_fos_energy");
        assert_eq!(names[1440], "shape_voxel_volume");
        assert_eq!(names[1455], "shape_flatness");
        // No duplicates.
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 1456);
    }
}
