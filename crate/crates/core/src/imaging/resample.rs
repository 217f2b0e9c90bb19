//! Resampling to 1 mm isotropic voxels.

use super::Volume3D;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Trilinear; used for images.
    Linear,
    /// Nearest neighbor; used for masks so the value set is preserved.
    Nearest,
}

/// Resample to spacing (1,1,1) mm. Output dims are `ceil(dims * spacing)`
/// per axis; output voxel `i` samples the input at continuous index
/// `i / spacing`. Out-of-bounds samples clamp to the edge.
pub fn resample_isotropic(vol: &Volume3D, mode: Interpolation) -> Result<Volume3D> {
    vol.validate()?;
    let out_dims = [
        (vol.dims[0] as f64 * vol.spacing[0]).ceil() as usize,
        (vol.dims[1] as f64 * vol.spacing[1]).ceil() as usize,
        (vol.dims[2] as f64 * vol.spacing[2]).ceil() as usize,
    ];
    let mut out = Volume3D {
        dims: out_dims,
        spacing: [1.0, 1.0, 1.0],
        origin: vol.origin,
        modality: vol.modality,
        voxels: vec![0.0; out_dims[0] * out_dims[1] * out_dims[2]],
    };
    let [nx, ny, nz] = vol.dims;
    for z in 0..out_dims[2] {
        let fz = z as f64 / vol.spacing[2];
        for y in 0..out_dims[1] {
            let fy = y as f64 / vol.spacing[1];
            for x in 0..out_dims[0] {
                let fx = x as f64 / vol.spacing[0];
                let v = match mode {
                    Interpolation::Nearest => {
                        let ix = (fx.round() as usize).min(nx - 1);
                        let iy = (fy.round() as usize).min(ny - 1);
                        let iz = (fz.round() as usize).min(nz - 1);
                        vol.at(ix, iy, iz)
                    }
                    Interpolation::Linear => trilinear(vol, fx, fy, fz),
                };
                out.set(x, y, z, v);
            }
        }
    }
    Ok(out)
}

fn trilinear(vol: &Volume3D, fx: f64, fy: f64, fz: f64) -> f32 {
    let [nx, ny, nz] = vol.dims;
    // Clamp the continuous coordinate to the voxel-center grid.
    let cx = fx.clamp(0.0, (nx - 1) as f64);
    let cy = fy.clamp(0.0, (ny - 1) as f64);
    let cz = fz.clamp(0.0, (nz - 1) as f64);
    let x0 = cx.floor() as usize;
    let y0 = cy.floor() as usize;
    let z0 = cz.floor() as usize;
    let x1 = (x0 + 1).min(nx - 1);
    let y1 = (y0 + 1).min(ny - 1);
    let z1 = (z0 + 1).min(nz - 1);
    let tx = cx - x0 as f64;
    let ty = cy - y0 as f64;
    let tz = cz - z0 as f64;

    let c000 = vol.at(x0, y0, z0) as f64;
    let c100 = vol.at(x1, y0, z0) as f64;
    let c010 = vol.at(x0, y1, z0) as f64;
    let c110 = vol.at(x1, y1, z0) as f64;
    let c001 = vol.at(x0, y0, z1) as f64;
    let c101 = vol.at(x1, y0, z1) as f64;
    let c011 = vol.at(x0, y1, z1) as f64;
    let c111 = vol.at(x1, y1, z1) as f64;

    let c00 = c000 * (1.0 - tx) + c100 * tx;
    let c10 = c010 * (1.0 - tx) + c110 * tx;
    let c01 = c001 * (1.0 - tx) + c101 * tx;
    let c11 = c011 * (1.0 - tx) + c111 * tx;
    let c0 = c00 * (1.0 - ty) + c10 * ty;
    let c1 = c01 * (1.0 - ty) + c11 * ty;
    (c0 * (1.0 - tz) + c1 * tz) as f32
}
