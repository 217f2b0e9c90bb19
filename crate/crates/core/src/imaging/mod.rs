//! Volume container and the preprocessing chain from raw PET/CT to
//! normalized tumor patches.

mod io;
mod patch;
mod resample;

pub use io::{read_volume, write_volume};
pub use patch::{clip_normalize, mask_and_crop, NormalizeMode, Patch};
pub use resample::{resample_isotropic, Interpolation};

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "PET")]
    Pet,
    #[serde(rename = "PET_SUV")]
    PetSuv,
    #[serde(rename = "CT")]
    Ct,
    #[serde(rename = "MASK")]
    Mask,
}

impl Modality {
    pub fn is_mask(self) -> bool {
        self == Modality::Mask
    }
}

/// A 3D scalar image with spacing/origin metadata. Voxels are stored
/// x-fastest: flat index = `(z * ny + y) * nx + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D {
    pub dims: [usize; 3],
    /// mm per voxel along each axis.
    pub spacing: [f64; 3],
    /// Physical position of voxel (0,0,0) in mm.
    pub origin: [f64; 3],
    pub modality: Modality,
    pub voxels: Vec<f32>,
}

impl Volume3D {
    pub fn new(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        modality: Modality,
        voxels: Vec<f32>,
    ) -> Result<Self> {
        let vol = Volume3D {
            dims,
            spacing,
            origin,
            modality,
            voxels,
        };
        vol.validate()?;
        Ok(vol)
    }

    pub fn zeros(dims: [usize; 3], spacing: [f64; 3], modality: Modality) -> Self {
        Volume3D {
            dims,
            spacing,
            origin: [0.0; 3],
            modality,
            voxels: vec![0.0; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(CoreError::InvalidVolume(format!(
                "dims must be strictly positive, got {:?}",
                self.dims
            )));
        }
        if self
            .spacing
            .iter()
            .any(|&s| !(s.is_finite() && s > 0.0))
        {
            return Err(CoreError::InvalidVolume(format!(
                "spacing must be strictly positive and finite, got {:?}",
                self.spacing
            )));
        }
        let expect = self.dims[0] * self.dims[1] * self.dims[2];
        if self.voxels.len() != expect {
            return Err(CoreError::InvalidVolume(format!(
                "voxel count {} does not match dims {:?} ({})",
                self.voxels.len(),
                self.dims,
                expect
            )));
        }
        if self.modality.is_mask() {
            if let Some(&bad) = self.voxels.iter().find(|&&v| v != 0.0 && v != 1.0) {
                return Err(CoreError::InvalidVolume(format!(
                    "mask contains value {bad}, only 0 and 1 are allowed"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f32 {
        self.voxels[self.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, v: f32) {
        let i = self.index(x, y, z);
        self.voxels[i] = v;
    }

    pub fn numel(&self) -> usize {
        self.voxels.len()
    }

    pub fn same_geometry(&self, other: &Volume3D) -> bool {
        self.dims == other.dims
            && self
                .spacing
                .iter()
                .zip(other.spacing.iter())
                .all(|(a, b)| (a - b).abs() < 1e-9)
            && self
                .origin
                .iter()
                .zip(other.origin.iter())
                .all(|(a, b)| (a - b).abs() < 1e-9)
    }
}

/// SUV(v) = C(v) [kBq/mL] * body_mass [g] / injected_dose [kBq].
///
/// With mass in kg and dose in MBq both unit conversions are a factor of
/// 1000 and cancel, leaving `C * mass_kg / dose_mbq`.
pub fn to_suv(pet: &Volume3D, body_mass_kg: f64, injected_dose_mbq: f64) -> Result<Volume3D> {
    if !(body_mass_kg.is_finite() && body_mass_kg > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "body mass must be positive, got {body_mass_kg}"
        )));
    }
    if !(injected_dose_mbq.is_finite() && injected_dose_mbq > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "injected dose must be positive, got {injected_dose_mbq}"
        )));
    }
    let factor = (body_mass_kg / injected_dose_mbq) as f32;
    let mut out = pet.clone();
    out.modality = Modality::PetSuv;
    for v in out.voxels.iter_mut() {
        *v *= factor;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_volume(dims: [usize; 3]) -> Volume3D {
        let n = dims[0] * dims[1] * dims[2];
        Volume3D::new(
            dims,
            [1.0, 1.0, 1.0],
            [0.0; 3],
            Modality::Pet,
            (0..n).map(|i| i as f32).collect(),
        )
        .unwrap()
    }

    #[test]
    fn suv_unit_arithmetic() {
        // C = 5 kBq/mL, mass 70 kg, dose 370 MBq:
        // SUV = 5 * 70000 g / 370000 kBq = 0.9459...
        let mut vol = ramp_volume([2, 2, 2]);
        vol.voxels.fill(5.0);
        let suv = to_suv(&vol, 70.0, 370.0).unwrap();
        assert_eq!(suv.modality, Modality::PetSuv);
        for &v in &suv.voxels {
            assert!((v as f64 - 5.0 * 70_000.0 / 370_000.0).abs() < 1e-6);
        }
    }

    #[test]
    fn suv_zero_activity_stays_zero() {
        let mut vol = ramp_volume([3, 2, 1]);
        vol.voxels.fill(0.0);
        let suv = to_suv(&vol, 80.0, 400.0).unwrap();
        assert!(suv.voxels.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn suv_rejects_nonpositive_mass_or_dose() {
        let vol = ramp_volume([2, 2, 2]);
        assert!(to_suv(&vol, 0.0, 370.0).is_err());
        assert!(to_suv(&vol, 70.0, 0.0).is_err());
        assert!(to_suv(&vol, -5.0, 370.0).is_err());
    }

    #[test]
    fn suv_is_linear_in_activity() {
        let vol = ramp_volume([3, 3, 3]);
        let mut scaled = vol.clone();
        for v in scaled.voxels.iter_mut() {
            *v *= 2.5;
        }
        let a = to_suv(&vol, 72.0, 333.0).unwrap();
        let b = to_suv(&scaled, 72.0, 333.0).unwrap();
        for (x, y) in a.voxels.iter().zip(b.voxels.iter()) {
            assert!((y - 2.5 * x).abs() < 1e-4);
        }
    }

    #[test]
    fn mask_values_validated() {
        let bad = Volume3D::new(
            [2, 1, 1],
            [1.0; 3],
            [0.0; 3],
            Modality::Mask,
            vec![0.0, 2.0],
        );
        assert!(bad.is_err());
    }
}
