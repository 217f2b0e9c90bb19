//! Volume container files: one JSON header line, then a little-endian raw
//! payload. Images are stored as f32, masks as u8.

use super::{Modality, Volume3D};
use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &str = "voxrad-volume-v1";

#[derive(Serialize, Deserialize)]
struct Header {
    magic: String,
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    modality: Modality,
    elem: String,
}

pub fn write_volume(vol: &Volume3D, path: &Path) -> Result<()> {
    vol.validate()?;
    let elem = if vol.modality.is_mask() { "u8" } else { "f32" };
    let header = Header {
        magic: MAGIC.to_string(),
        dims: vol.dims,
        spacing: vol.spacing,
        origin: vol.origin,
        modality: vol.modality,
        elem: elem.to_string(),
    };
    let file = File::create(path).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")
        .map_err(|e| CoreError::io(path.display().to_string(), e))?;
    let mut payload: Vec<u8> = Vec::with_capacity(vol.voxels.len() * 4);
    if elem == "u8" {
        payload.extend(vol.voxels.iter().map(|&v| v as u8));
    } else {
        for &v in &vol.voxels {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&payload)
        .map_err(|e| CoreError::io(path.display().to_string(), e))?;
    Ok(())
}

pub fn read_volume(path: &Path) -> Result<Volume3D> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| CoreError::io(&display, e))?;
    let mut r = BufReader::new(file);
    let mut header_bytes = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read_exact(&mut byte).is_err() {
            return Err(CoreError::MalformedVolume {
                path: display,
                reason: "missing header terminator".into(),
            });
        }
        if byte[0] == b'\n' {
            break;
        }
        header_bytes.push(byte[0]);
        if header_bytes.len() > 1 << 16 {
            return Err(CoreError::MalformedVolume {
                path: display,
                reason: "header exceeds 64 KiB".into(),
            });
        }
    }
    let header: Header =
        serde_json::from_slice(&header_bytes).map_err(|e| CoreError::MalformedVolume {
            path: display.clone(),
            reason: format!("invalid header JSON: {e}"),
        })?;
    if header.magic != MAGIC {
        return Err(CoreError::MalformedVolume {
            path: display,
            reason: format!("bad magic `{}`", header.magic),
        });
    }
    let n = header.dims[0]
        .checked_mul(header.dims[1])
        .and_then(|v| v.checked_mul(header.dims[2]))
        .ok_or_else(|| CoreError::MalformedVolume {
            path: display.clone(),
            reason: "dims overflow".into(),
        })?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)
        .map_err(|e| CoreError::io(&display, e))?;
    let voxels: Vec<f32> = match header.elem.as_str() {
        "f32" => {
            if payload.len() != n * 4 {
                return Err(CoreError::MalformedVolume {
                    path: display,
                    reason: format!(
                        "declared {} voxels ({} bytes) but payload is {} bytes",
                        n,
                        n * 4,
                        payload.len()
                    ),
                });
            }
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect()
        }
        "u8" => {
            if payload.len() != n {
                return Err(CoreError::MalformedVolume {
                    path: display,
                    reason: format!(
                        "declared {} voxels but payload is {} bytes",
                        n,
                        payload.len()
                    ),
                });
            }
            payload.iter().map(|&b| b as f32).collect()
        }
        other => {
            return Err(CoreError::MalformedVolume {
                path: display,
                reason: format!("unknown element type `{other}`"),
            })
        }
    };
    Volume3D::new(
        header.dims,
        header.spacing,
        header.origin,
        header.modality,
        voxels,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.vol");
        let vol = Volume3D::new(
            [4, 3, 2],
            [1.5, 2.0, 2.5],
            [10.0, -4.0, 0.5],
            Modality::Ct,
            (0..24).map(|i| i as f32).collect(),
        )
        .unwrap();
        write_volume(&vol, &path).unwrap();
        let back = read_volume(&path).unwrap();
        assert_eq!(back, vol);
    }

    #[test]
    fn roundtrip_is_bit_exact_for_odd_floats() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.vol");
        let values = vec![
            f32::MIN_POSITIVE,
            -0.0,
            1e-30,
            3.4e38,
            -7.25,
            std::f32::consts::PI,
            1.0 + f32::EPSILON,
            42.0,
        ];
        let vol = Volume3D::new([8, 1, 1], [1.0; 3], [0.0; 3], Modality::Pet, values.clone())
            .unwrap();
        write_volume(&vol, &path).unwrap();
        let back = read_volume(&path).unwrap();
        for (a, b) in back.voxels.iter().zip(values.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.vol");
        let header = r#"{"magic":"voxrad-volume-v1","dims":[2,2,2],"spacing":[1.0,1.0,1.0],"origin":[0.0,0.0,0.0],"modality":"PET","elem":"f32"}"#;
        let mut bytes = header.as_bytes().to_vec();
        bytes.push(b'\n');
        bytes.extend_from_slice(&[0u8; 7 * 4]); // 7 values, header says 8
        std::fs::write(&path, bytes).unwrap();
        match read_volume(&path) {
            Err(CoreError::MalformedVolume { .. }) => {}
            other => panic!("expected MalformedVolume, got {other:?}"),
        }
    }

    #[test]
    fn mask_with_out_of_range_value_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad_mask.vol");
        let header = r#"{"magic":"voxrad-volume-v1","dims":[2,1,1],"spacing":[1.0,1.0,1.0],"origin":[0.0,0.0,0.0],"modality":"MASK","elem":"u8"}"#;
        let mut bytes = header.as_bytes().to_vec();
        bytes.push(b'\n');
        bytes.extend_from_slice(&[1u8, 2u8]);
        std::fs::write(&path, bytes).unwrap();
        match read_volume(&path) {
            Err(CoreError::InvalidVolume(msg)) => assert!(msg.contains("mask")),
            other => panic!("expected InvalidVolume, got {other:?}"),
        }
    }

    #[test]
    fn mask_roundtrips_through_u8() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vol");
        let vol = Volume3D::new(
            [2, 2, 1],
            [1.0; 3],
            [0.0; 3],
            Modality::Mask,
            vec![0.0, 1.0, 1.0, 0.0],
        )
        .unwrap();
        write_volume(&vol, &path).unwrap();
        assert_eq!(read_volume(&path).unwrap(), vol);
    }
}
