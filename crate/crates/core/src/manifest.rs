//! Cohort manifests: one CSV row per study pointing at the volume files,
//! plus clinical covariates and the outcome label.

use crate::error::{CoreError, Result};
use crate::imaging::{read_volume, write_volume, Modality, Patch};
use crate::study::{PreprocessedStudy, StudyRecord, TnmStage};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct ManifestRow {
    pub id: String,
    pub pet_path: PathBuf,
    pub ct_path: PathBuf,
    pub mask_path: PathBuf,
    pub body_mass_kg: f64,
    pub injected_dose_mbq: f64,
    pub tnm_stage: TnmStage,
    pub label: u8,
}

const HEADER: [&str; 8] = [
    "id", "pet", "ct", "mask", "body_mass_kg", "injected_dose_mbq", "tnm", "label",
];

pub fn write_manifest(rows: &[ManifestRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.id.clone(),
            r.pet_path.display().to_string(),
            r.ct_path.display().to_string(),
            r.mask_path.display().to_string(),
            format!("{}", r.body_mass_kg),
            format!("{}", r.injected_dose_mbq),
            r.tnm_stage.to_string(),
            format!("{}", r.label),
        ])?;
    }
    w.flush().map_err(|e| CoreError::io(path.display().to_string(), e))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    if !path.exists() {
        return Err(CoreError::MissingInput(format!(
            "manifest {} does not exist",
            path.display()
        )));
    }
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CoreError::Config(format!(
            "manifest {} has unexpected header {:?}",
            path.display(),
            header
        )));
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |s: &str| -> PathBuf {
        let p = PathBuf::from(s);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        rows.push(ManifestRow {
            id: record[0].to_string(),
            pet_path: resolve(&record[1]),
            ct_path: resolve(&record[2]),
            mask_path: resolve(&record[3]),
            body_mass_kg: record[4]
                .parse()
                .map_err(|e| CoreError::Config(format!("bad body mass: {e}")))?,
            injected_dose_mbq: record[5]
                .parse()
                .map_err(|e| CoreError::Config(format!("bad dose: {e}")))?,
            tnm_stage: record[6].parse()?,
            label: record[7]
                .parse()
                .map_err(|e| CoreError::Config(format!("bad label: {e}")))?,
        });
    }
    Ok(rows)
}

/// Persist a raw cohort: one volume file per modality per study plus the
/// manifest (with paths relative to the manifest's directory).
pub fn write_cohort(cohort: &[StudyRecord], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir.display().to_string(), e))?;
    let mut rows = Vec::with_capacity(cohort.len());
    for record in cohort {
        let pet = format!("{}_pet.vol", record.id);
        let ct = format!("{}_ct.vol", record.id);
        let mask = format!("{}_mask.vol", record.id);
        write_volume(&record.pet, &dir.join(&pet))?;
        write_volume(&record.ct, &dir.join(&ct))?;
        write_volume(&record.mask, &dir.join(&mask))?;
        rows.push(ManifestRow {
            id: record.id.clone(),
            pet_path: PathBuf::from(pet),
            ct_path: PathBuf::from(ct),
            mask_path: PathBuf::from(mask),
            body_mass_kg: record.body_mass_kg,
            injected_dose_mbq: record.injected_dose_mbq,
            tnm_stage: record.tnm_stage,
            label: record.label,
        });
    }
    let manifest = dir.join("cohort.csv");
    // Rows were built with relative paths; write them relative.
    let mut w = csv::Writer::from_path(&manifest)?;
    w.write_record(HEADER)?;
    for r in &rows {
        w.write_record([
            r.id.clone(),
            r.pet_path.display().to_string(),
            r.ct_path.display().to_string(),
            r.mask_path.display().to_string(),
            format!("{}", r.body_mass_kg),
            format!("{}", r.injected_dose_mbq),
            r.tnm_stage.to_string(),
            format!("{}", r.label),
        ])?;
    }
    w.flush()
        .map_err(|e| CoreError::io(manifest.display().to_string(), e))?;
    Ok(manifest)
}

pub fn read_cohort(manifest: &Path) -> Result<Vec<StudyRecord>> {
    read_manifest(manifest)?
        .into_iter()
        .map(|row| {
            Ok(StudyRecord {
                id: row.id,
                pet: read_volume(&row.pet_path)?,
                ct: read_volume(&row.ct_path)?,
                mask: read_volume(&row.mask_path)?,
                tnm_stage: row.tnm_stage,
                body_mass_kg: row.body_mass_kg,
                injected_dose_mbq: row.injected_dose_mbq,
                label: row.label,
            })
        })
        .collect()
}

/// Persist preprocessed patches (PET, CT, ROI) and a manifest reusing the
/// same row schema (mass/dose no longer meaningful, stored as 0).
pub fn write_preprocessed(studies: &[PreprocessedStudy], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir.display().to_string(), e))?;
    let mut rows = Vec::with_capacity(studies.len());
    for s in studies {
        let pet = format!("{}_pet_patch.vol", s.id);
        let ct = format!("{}_ct_patch.vol", s.id);
        let roi = format!("{}_roi_patch.vol", s.id);
        write_volume(&s.pet.to_volume(Modality::PetSuv), &dir.join(&pet))?;
        write_volume(&s.ct.to_volume(Modality::Ct), &dir.join(&ct))?;
        let roi_vol = crate::imaging::Volume3D {
            dims: s.pet.dims,
            spacing: [1.0; 3],
            origin: [
                s.pet.offset[0] as f64,
                s.pet.offset[1] as f64,
                s.pet.offset[2] as f64,
            ],
            modality: Modality::Mask,
            voxels: s.pet.roi.iter().map(|&m| m as f32).collect(),
        };
        write_volume(&roi_vol, &dir.join(&roi))?;
        rows.push([
            s.id.clone(),
            pet,
            ct,
            roi,
            "0".to_string(),
            "0".to_string(),
            s.tnm_stage.to_string(),
            format!("{}", s.label),
        ]);
    }
    let manifest = dir.join("preprocessed.csv");
    let mut w = csv::Writer::from_path(&manifest)?;
    w.write_record(HEADER)?;
    for r in &rows {
        w.write_record(r)?;
    }
    w.flush()
        .map_err(|e| CoreError::io(manifest.display().to_string(), e))?;
    Ok(manifest)
}

pub fn read_preprocessed(manifest: &Path) -> Result<Vec<PreprocessedStudy>> {
    read_manifest(manifest)?
        .into_iter()
        .map(|row| {
            let pet = read_volume(&row.pet_path)?;
            let ct = read_volume(&row.ct_path)?;
            let roi = read_volume(&row.mask_path)?;
            Ok(PreprocessedStudy {
                id: row.id,
                pet: Patch::from_volumes(&pet, &roi)?,
                ct: Patch::from_volumes(&ct, &roi)?,
                tnm_stage: row.tnm_stage,
                label: row.label,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{generate_cohort, PhantomSpec};

    #[test]
    fn cohort_roundtrip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let spec = PhantomSpec {
            n: 3,
            pet_dims: [16, 16, 12],
            pet_spacing: [2.0, 2.0, 2.0],
            ct_dims: [32, 32, 24],
            ct_spacing: [1.0, 1.0, 1.0],
            radius_range_mm: (4.0, 6.0),
            ..PhantomSpec::default()
        };
        let cohort = generate_cohort(&spec).unwrap();
        let manifest = write_cohort(&cohort, dir.path()).unwrap();
        let back = read_cohort(&manifest).unwrap();
        assert_eq!(back.len(), cohort.len());
        for (a, b) in back.iter().zip(cohort.iter()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.pet, b.pet);
            assert_eq!(a.ct, b.ct);
            assert_eq!(a.mask, b.mask);
            assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn missing_manifest_is_a_missing_input() {
        let err = read_manifest(Path::new("/nonexistent/cohort.csv")).unwrap_err();
        assert!(matches!(err, CoreError::MissingInput(_)));
    }
}
