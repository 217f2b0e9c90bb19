//! Per-patient study records and the preprocessed form consumed by feature
//! extraction and the deep models.

use crate::error::{CoreError, Result};
use crate::imaging::{
    clip_normalize, mask_and_crop, resample_isotropic, to_suv, Interpolation, NormalizeMode,
    Patch, Volume3D,
};
use serde::{Deserialize, Serialize};

/// Anatomical stage, a binary clinical covariate here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TnmStage {
    #[serde(rename = "III")]
    Iii,
    #[serde(rename = "IVa")]
    Iva,
}

impl TnmStage {
    /// Encoding used everywhere a numeric covariate is needed: III -> 0, IVa -> 1.
    pub fn encoded(self) -> f64 {
        match self {
            TnmStage::Iii => 0.0,
            TnmStage::Iva => 1.0,
        }
    }
}

impl std::str::FromStr for TnmStage {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "III" => Ok(TnmStage::Iii),
            "IVa" => Ok(TnmStage::Iva),
            other => Err(CoreError::InvalidParameter(format!(
                "unknown TNM stage `{other}` (expected III or IVa)"
            ))),
        }
    }
}

impl std::fmt::Display for TnmStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TnmStage::Iii => write!(f, "III"),
            TnmStage::Iva => write!(f, "IVa"),
        }
    }
}

/// One patient: raw volumes plus clinical covariates and outcome label
/// (1 = relapse within the horizon, 0 = alive/censored beyond it).
#[derive(Debug, Clone)]
pub struct StudyRecord {
    pub id: String,
    pub pet: Volume3D,
    pub ct: Volume3D,
    pub mask: Volume3D,
    pub tnm_stage: TnmStage,
    pub body_mass_kg: f64,
    pub injected_dose_mbq: f64,
    pub label: u8,
}

impl StudyRecord {
    pub fn validate(&self) -> Result<()> {
        self.pet.validate()?;
        self.ct.validate()?;
        self.mask.validate()?;
        if self.label > 1 {
            return Err(CoreError::InvalidParameter(format!(
                "label must be 0 or 1, got {}",
                self.label
            )));
        }
        Ok(())
    }
}

/// Preprocessing parameters; defaults follow the pipeline contract
/// (80x80x64 patches, 5/95 percentile clipping).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessParams {
    pub patch_dims: [usize; 3],
    pub lo_pct: f64,
    pub hi_pct: f64,
    pub scaled_extrema: bool,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        PreprocessParams {
            patch_dims: [80, 80, 64],
            lo_pct: 5.0,
            hi_pct: 95.0,
            scaled_extrema: false,
        }
    }
}

/// A study reduced to normalized patches, ready for feature extraction or
/// network input.
#[derive(Debug, Clone)]
pub struct PreprocessedStudy {
    pub id: String,
    pub pet: Patch,
    pub ct: Patch,
    pub tnm_stage: TnmStage,
    pub label: u8,
}

/// The full chain: SUV conversion, isotropic resampling (linear for images,
/// nearest for the mask), masked centroid-centered crop, percentile
/// normalization.
pub fn preprocess_study(record: &StudyRecord, params: &PreprocessParams) -> Result<PreprocessedStudy> {
    record.validate()?;
    let suv = to_suv(&record.pet, record.body_mass_kg, record.injected_dose_mbq)?;
    let suv_iso = resample_isotropic(&suv, Interpolation::Linear)?;
    let ct_iso = resample_isotropic(&record.ct, Interpolation::Linear)?;
    let mask_iso = resample_isotropic(&record.mask, Interpolation::Nearest)?;
    if suv_iso.dims != ct_iso.dims || suv_iso.dims != mask_iso.dims {
        return Err(CoreError::GeometryMismatch(format!(
            "resampled dims disagree: pet {:?}, ct {:?}, mask {:?}",
            suv_iso.dims, ct_iso.dims, mask_iso.dims
        )));
    }
    let mode = if params.scaled_extrema {
        NormalizeMode::ScaledExtrema
    } else {
        NormalizeMode::Percentile
    };
    let pet_patch = mask_and_crop(&suv_iso, &mask_iso, params.patch_dims)?;
    let ct_patch = mask_and_crop(&ct_iso, &mask_iso, params.patch_dims)?;
    let pet_patch = clip_normalize(&pet_patch, params.lo_pct, params.hi_pct, mode)?;
    let ct_patch = clip_normalize(&ct_patch, params.lo_pct, params.hi_pct, mode)?;
    Ok(PreprocessedStudy {
        id: record.id.clone(),
        pet: pet_patch,
        ct: ct_patch,
        tnm_stage: record.tnm_stage,
        label: record.label,
    })
}
