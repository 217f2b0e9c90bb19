//! Synthetic PET/CT cohorts with known generative structure.
//!
//! Each study gets an ellipsoid-plus-noise tumor mask, PET activity with a
//! class-dependent uptake peak and texture, CT with class-dependent
//! heterogeneity, and a TNM stage correlated with the class. All randomness
//! comes from counter-based streams keyed by (seed, purpose, study index),
//! so generation is stable under any parallel schedule.

use crate::error::{CoreError, Result};
use crate::imaging::{Modality, Volume3D};
use crate::rng::{normal, shuffled_indices, stream};
use crate::study::{StudyRecord, TnmStage};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Intensity/texture parameters for one outcome class.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassParams {
    /// Mean of the tumor SUV peak.
    pub suv_peak_mean: f64,
    pub suv_peak_sd: f64,
    /// Multiplicative PET texture strength inside the tumor.
    pub pet_texture_strength: f64,
    /// Correlation length of the PET texture field, mm.
    pub pet_texture_corr_mm: f64,
    /// Additive CT heterogeneity (HU-like units).
    pub ct_texture_sd: f64,
    pub ct_texture_corr_mm: f64,
}

impl Default for ClassParams {
    fn default() -> Self {
        ClassParams {
            suv_peak_mean: 6.0,
            suv_peak_sd: 0.8,
            pet_texture_strength: 0.10,
            pet_texture_corr_mm: 4.0,
            ct_texture_sd: 6.0,
            ct_texture_corr_mm: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomSpec {
    /// Cohort size.
    pub n: usize,
    /// Fraction labeled 1 (before label noise).
    pub prevalence: f64,
    /// Tumor semi-axis range, mm (drawn independently per axis).
    pub radius_range_mm: (f64, f64),
    pub class0: ClassParams,
    pub class1: ClassParams,
    /// 1 = TNM copies the class; 0 = TNM independent of it.
    pub tnm_signal_strength: f64,
    /// Probability the final label flips away from the class.
    pub label_noise: f64,
    pub seed: u64,
    /// PET grid (coarser than CT, like a real scanner).
    pub pet_dims: [usize; 3],
    pub pet_spacing: [f64; 3],
    /// CT/mask grid. Physical extent must match the PET grid.
    pub ct_dims: [usize; 3],
    pub ct_spacing: [f64; 3],
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            n: 170,
            prevalence: 0.2824,
            radius_range_mm: (6.0, 12.0),
            class0: ClassParams::default(),
            class1: ClassParams {
                suv_peak_mean: 9.0,
                suv_peak_sd: 1.0,
                pet_texture_strength: 0.25,
                pet_texture_corr_mm: 2.0,
                ct_texture_sd: 14.0,
                ct_texture_corr_mm: 2.5,
            },
            tnm_signal_strength: 0.6,
            label_noise: 0.0,
            seed: 7,
            pet_dims: [40, 40, 28],
            pet_spacing: [2.0, 2.0, 2.0],
            ct_dims: [80, 80, 56],
            ct_spacing: [1.0, 1.0, 1.0],
        }
    }
}

impl PhantomSpec {
    /// Cohort tuned for the deep-model ablation study: PET carries the
    /// dominant but not saturated signal, CT a weak one, TNM an independent
    /// moderate one.
    pub fn dlr_ablation(seed: u64) -> Self {
        PhantomSpec {
            seed,
            class1: ClassParams {
                suv_peak_mean: 7.8,
                suv_peak_sd: 1.0,
                pet_texture_strength: 0.22,
                pet_texture_corr_mm: 2.0,
                ct_texture_sd: 10.0,
                ct_texture_corr_mm: 3.0,
                ..ClassParams::default()
            },
            tnm_signal_strength: 0.6,
            radius_range_mm: (6.0, 10.0),
            ..PhantomSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(CoreError::InvalidParameter(format!(
                "cohort size must be >= 2, got {}",
                self.n
            )));
        }
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "prevalence must be in (0,1), got {}",
                self.prevalence
            )));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return Err(CoreError::InvalidParameter(format!(
                "label_noise must be in [0, 0.5), got {}",
                self.label_noise
            )));
        }
        if !(0.0..=1.0).contains(&self.tnm_signal_strength) {
            return Err(CoreError::InvalidParameter(format!(
                "tnm_signal_strength must be in [0,1], got {}",
                self.tnm_signal_strength
            )));
        }
        if self.radius_range_mm.0 <= 0.0 || self.radius_range_mm.1 < self.radius_range_mm.0 {
            return Err(CoreError::InvalidParameter(format!(
                "bad radius range {:?}",
                self.radius_range_mm
            )));
        }
        for a in 0..3 {
            let pet_extent = self.pet_dims[a] as f64 * self.pet_spacing[a];
            let ct_extent = self.ct_dims[a] as f64 * self.ct_spacing[a];
            if (pet_extent - ct_extent).abs() > 1e-9 {
                return Err(CoreError::GeometryMismatch(format!(
                    "PET extent {pet_extent} mm vs CT extent {ct_extent} mm on axis {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Gaussian white noise smoothed with a separable Gaussian kernel, then
/// rescaled to unit variance. `sigma_voxels` per axis.
fn smooth_noise_field(
    dims: [usize; 3],
    sigma_voxels: [f64; 3],
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let n = dims[0] * dims[1] * dims[2];
    let mut field: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    for axis in 0..3 {
        let sigma = sigma_voxels[axis];
        if sigma <= 0.05 {
            continue;
        }
        let radius = (3.0 * sigma).ceil() as i64;
        let kernel: Vec<f64> = (-radius..=radius)
            .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
            .collect();
        let ksum: f64 = kernel.iter().sum();
        let kernel: Vec<f64> = kernel.iter().map(|v| v / ksum).collect();
        let mut out = vec![0.0; n];
        let idx = |x: usize, y: usize, z: usize| (z * dims[1] + y) * dims[0] + x;
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let mut acc = 0.0;
                    for (ki, &kv) in kernel.iter().enumerate() {
                        let off = ki as i64 - radius;
                        let pos = [x as i64, y as i64, z as i64];
                        let mut p = pos;
                        p[axis] = (pos[axis] + off).clamp(0, dims[axis] as i64 - 1);
                        acc += kv * field[idx(p[0] as usize, p[1] as usize, p[2] as usize)];
                    }
                    out[idx(x, y, z)] = acc;
                }
            }
        }
        field = out;
    }
    // Rescale to unit variance so texture strengths are comparable across
    // correlation lengths.
    let mean = field.iter().sum::<f64>() / n as f64;
    let var = field.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 1.0 };
    for v in field.iter_mut() {
        *v = (*v - mean) * scale;
    }
    field
}

struct TumorGeometry {
    center_mm: [f64; 3],
    semi_axes_mm: [f64; 3],
}

/// Normalized ellipsoid distance of a physical point; <= 1 is inside.
fn ellipsoid_rho(geom: &TumorGeometry, p_mm: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for a in 0..3 {
        let d = (p_mm[a] - geom.center_mm[a]) / geom.semi_axes_mm[a];
        acc += d * d;
    }
    acc.sqrt()
}

/// Keep only the largest 26-connected component of a binary field.
fn largest_component(mask: &mut [u8], dims: [usize; 3]) {
    let idx = |x: usize, y: usize, z: usize| (z * dims[1] + y) * dims[0] + x;
    let mut component = vec![0u32; mask.len()];
    let mut sizes = vec![0usize]; // component 0 = background
    let mut stack = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let i = idx(x, y, z);
                if mask[i] == 0 || component[i] != 0 {
                    continue;
                }
                let label = sizes.len() as u32;
                sizes.push(0);
                component[i] = label;
                stack.push((x as i64, y as i64, z as i64));
                while let Some((cx, cy, cz)) = stack.pop() {
                    *sizes.last_mut().unwrap() += 1;
                    for dz in -1..=1i64 {
                        for dy in -1..=1i64 {
                            for dx in -1..=1i64 {
                                let (nx, ny, nz) = (cx + dx, cy + dy, cz + dz);
                                if nx < 0
                                    || ny < 0
                                    || nz < 0
                                    || nx as usize >= dims[0]
                                    || ny as usize >= dims[1]
                                    || nz as usize >= dims[2]
                                {
                                    continue;
                                }
                                let ni = idx(nx as usize, ny as usize, nz as usize);
                                if mask[ni] != 0 && component[ni] == 0 {
                                    component[ni] = label;
                                    stack.push((nx, ny, nz));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if sizes.len() <= 2 {
        return; // zero or one component
    }
    let best = (1..sizes.len()).max_by_key(|&l| sizes[l]).unwrap() as u32;
    for (m, &c) in mask.iter_mut().zip(component.iter()) {
        if c != best {
            *m = 0;
        }
    }
}

fn generate_study(spec: &PhantomSpec, index: usize, class: u8) -> StudyRecord {
    let seed = spec.seed;
    let params = if class == 1 { spec.class1 } else { spec.class0 };

    // Clinical covariates.
    let mut clin_rng = stream(seed, "clinical", &[index as u64]);
    let body_mass_kg = (70.0 + 10.0 * normal(&mut clin_rng)).clamp(45.0, 110.0);
    let injected_dose_mbq = 7.4 * body_mass_kg * (1.0 + 0.03 * normal(&mut clin_rng));

    // Tumor geometry in physical coordinates.
    let mut geo_rng = stream(seed, "geometry", &[index as u64]);
    let extent = [
        spec.ct_dims[0] as f64 * spec.ct_spacing[0],
        spec.ct_dims[1] as f64 * spec.ct_spacing[1],
        spec.ct_dims[2] as f64 * spec.ct_spacing[2],
    ];
    let (r_lo, r_hi) = spec.radius_range_mm;
    let semi_axes_mm = [
        geo_rng.random_range(r_lo..=r_hi),
        geo_rng.random_range(r_lo..=r_hi),
        geo_rng.random_range(r_lo..=r_hi),
    ];
    let center_mm = [
        extent[0] / 2.0 + geo_rng.random_range(-3.0..=3.0),
        extent[1] / 2.0 + geo_rng.random_range(-3.0..=3.0),
        extent[2] / 2.0 + geo_rng.random_range(-3.0..=3.0),
    ];
    let geom = TumorGeometry {
        center_mm,
        semi_axes_mm,
    };

    // Mask on the CT grid with a smooth boundary perturbation; the largest
    // 26-connected component wins so the invariant holds by construction.
    let mut mask_rng = stream(seed, "mask", &[index as u64]);
    let boundary_noise = smooth_noise_field(
        spec.ct_dims,
        [
            4.0 / spec.ct_spacing[0],
            4.0 / spec.ct_spacing[1],
            4.0 / spec.ct_spacing[2],
        ],
        &mut mask_rng,
    );
    let mut mask_vox = vec![0u8; spec.ct_dims[0] * spec.ct_dims[1] * spec.ct_dims[2]];
    {
        let idx = |x: usize, y: usize, z: usize| (z * spec.ct_dims[1] + y) * spec.ct_dims[0] + x;
        for z in 0..spec.ct_dims[2] {
            for y in 0..spec.ct_dims[1] {
                for x in 0..spec.ct_dims[0] {
                    let p = [
                        x as f64 * spec.ct_spacing[0],
                        y as f64 * spec.ct_spacing[1],
                        z as f64 * spec.ct_spacing[2],
                    ];
                    let rho = ellipsoid_rho(&geom, p);
                    let perturbed = rho * (1.0 + 0.12 * boundary_noise[idx(x, y, z)]);
                    if perturbed <= 1.0 {
                        mask_vox[idx(x, y, z)] = 1;
                    }
                }
            }
        }
    }
    largest_component(&mut mask_vox, spec.ct_dims);
    let mask = Volume3D {
        dims: spec.ct_dims,
        spacing: spec.ct_spacing,
        origin: [0.0; 3],
        modality: Modality::Mask,
        voxels: mask_vox.iter().map(|&m| m as f32).collect(),
    };

    // PET on its own grid: background uptake plus a peaked tumor profile
    // with class-dependent texture. Voxels store activity concentration so
    // the SUV conversion is exercised downstream.
    let mut pet_rng = stream(seed, "pet", &[index as u64]);
    let suv_peak = (params.suv_peak_mean + params.suv_peak_sd * normal(&mut pet_rng)).max(1.5);
    let pet_texture = smooth_noise_field(
        spec.pet_dims,
        [
            params.pet_texture_corr_mm / spec.pet_spacing[0],
            params.pet_texture_corr_mm / spec.pet_spacing[1],
            params.pet_texture_corr_mm / spec.pet_spacing[2],
        ],
        &mut pet_rng,
    );
    let pet_background = smooth_noise_field(
        spec.pet_dims,
        [
            3.0 / spec.pet_spacing[0],
            3.0 / spec.pet_spacing[1],
            3.0 / spec.pet_spacing[2],
        ],
        &mut pet_rng,
    );
    let suv_to_activity = (injected_dose_mbq / body_mass_kg) as f32;
    let mut pet_vox = vec![0f32; spec.pet_dims[0] * spec.pet_dims[1] * spec.pet_dims[2]];
    {
        let idx = |x: usize, y: usize, z: usize| (z * spec.pet_dims[1] + y) * spec.pet_dims[0] + x;
        for z in 0..spec.pet_dims[2] {
            for y in 0..spec.pet_dims[1] {
                for x in 0..spec.pet_dims[0] {
                    let p = [
                        x as f64 * spec.pet_spacing[0],
                        y as f64 * spec.pet_spacing[1],
                        z as f64 * spec.pet_spacing[2],
                    ];
                    let rho = ellipsoid_rho(&geom, p);
                    let i = idx(x, y, z);
                    let suv = if rho <= 1.0 {
                        let profile = 1.0 - 0.35 * rho * rho;
                        (suv_peak * profile * (1.0 + params.pet_texture_strength * pet_texture[i]))
                            .max(0.2)
                    } else {
                        (0.7 + 0.15 * pet_background[i]).max(0.05)
                    };
                    pet_vox[i] = suv as f32 * suv_to_activity;
                }
            }
        }
    }
    let pet = Volume3D {
        dims: spec.pet_dims,
        spacing: spec.pet_spacing,
        origin: [0.0; 3],
        modality: Modality::Pet,
        voxels: pet_vox,
    };

    // CT on the fine grid: soft-tissue base with class-dependent
    // heterogeneity inside the tumor.
    let mut ct_rng = stream(seed, "ct", &[index as u64]);
    let ct_texture = smooth_noise_field(
        spec.ct_dims,
        [
            params.ct_texture_corr_mm / spec.ct_spacing[0],
            params.ct_texture_corr_mm / spec.ct_spacing[1],
            params.ct_texture_corr_mm / spec.ct_spacing[2],
        ],
        &mut ct_rng,
    );
    let ct_background = smooth_noise_field(
        spec.ct_dims,
        [
            5.0 / spec.ct_spacing[0],
            5.0 / spec.ct_spacing[1],
            5.0 / spec.ct_spacing[2],
        ],
        &mut ct_rng,
    );
    let mut ct_vox = vec![0f32; spec.ct_dims[0] * spec.ct_dims[1] * spec.ct_dims[2]];
    {
        let idx = |x: usize, y: usize, z: usize| (z * spec.ct_dims[1] + y) * spec.ct_dims[0] + x;
        for z in 0..spec.ct_dims[2] {
            for y in 0..spec.ct_dims[1] {
                for x in 0..spec.ct_dims[0] {
                    let i = idx(x, y, z);
                    let hu = if mask.voxels[i] != 0.0 {
                        45.0 + params.ct_texture_sd * ct_texture[i]
                    } else {
                        20.0 + 15.0 * ct_background[i]
                    };
                    ct_vox[i] = hu as f32;
                }
            }
        }
    }
    let ct = Volume3D {
        dims: spec.ct_dims,
        spacing: spec.ct_spacing,
        origin: [0.0; 3],
        modality: Modality::Ct,
        voxels: ct_vox,
    };

    // TNM: class copied, flipped with probability (1 - strength) / 2.
    let mut label_rng = stream(seed, "label", &[index as u64]);
    let flip_tnm = label_rng.random::<f64>() < (1.0 - spec.tnm_signal_strength) / 2.0;
    let tnm_class = if flip_tnm { 1 - class } else { class };
    let tnm_stage = if tnm_class == 1 {
        TnmStage::Iva
    } else {
        TnmStage::Iii
    };
    let flip_label = label_rng.random::<f64>() < spec.label_noise;
    let label = if flip_label { 1 - class } else { class };

    StudyRecord {
        id: format!("phantom-{index:04}"),
        pet,
        ct,
        mask,
        tnm_stage,
        body_mass_kg,
        injected_dose_mbq,
        label,
    }
}

/// Deterministic cohort generation. Exactly `round(n * prevalence)` studies
/// belong to class 1 (labels may differ when `label_noise > 0`).
pub fn generate_cohort(spec: &PhantomSpec) -> Result<Vec<StudyRecord>> {
    spec.validate()?;
    let k = (spec.n as f64 * spec.prevalence).round() as usize;
    let mut classes = vec![0u8; spec.n];
    for c in classes.iter_mut().take(k) {
        *c = 1;
    }
    let mut class_rng = stream(spec.seed, "classes", &[]);
    let order = shuffled_indices(spec.n, &mut class_rng);
    let shuffled: Vec<u8> = order.iter().map(|&i| classes[i]).collect();

    Ok((0..spec.n)
        .into_par_iter()
        .map(|i| generate_study(spec, i, shuffled[i]))
        .collect())
}

/// Disjoint random (train, valid) index partition, re-drawn per repeat.
pub fn cohort_split(
    cohort_size: usize,
    n_train: usize,
    n_valid: usize,
    repeat_index: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_train + n_valid != cohort_size {
        return Err(CoreError::SizeMismatch(format!(
            "n_train {n_train} + n_valid {n_valid} != cohort size {cohort_size}"
        )));
    }
    let mut rng = stream(seed, "split", &[repeat_index as u64]);
    let order = shuffled_indices(cohort_size, &mut rng);
    let train = order[..n_train].to_vec();
    let valid = order[n_train..].to_vec();
    Ok((train, valid))
}
