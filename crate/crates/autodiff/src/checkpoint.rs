//! Parameter checkpoints: JSON header line + little-endian payload.
//!
//! The header records every tensor (name, shape, trainable flag, byte
//! offset) plus optimizer state; the payload is the concatenation of the
//! tensors' raw little-endian values in header order.

use crate::adam::{AdamConfig, AdamState};
use crate::params::ParamStore;
use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &str = "voxrad-checkpoint-v1";

#[derive(Serialize, Deserialize)]
struct TensorMeta {
    name: String,
    shape: Vec<usize>,
    trainable: bool,
    offset: usize,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct AdamMeta {
    step: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    /// Moment tensors stored as `<name>.m` / `<name>.v` entries appended
    /// after the parameters, in this order.
    params: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    magic: String,
    dtype: String,
    tensors: Vec<TensorMeta>,
    adam: Option<AdamMeta>,
}

pub fn save<T: Scalar>(
    path: &Path,
    store: &ParamStore<T>,
    adam: Option<&AdamState<T>>,
) -> Result<()> {
    let mut tensors = Vec::new();
    let mut payload: Vec<u8> = Vec::new();
    let mut push = |name: String, t: &Tensor<T>, trainable: bool, tensors: &mut Vec<TensorMeta>| {
        let offset = payload.len();
        for &v in t.data() {
            payload.extend_from_slice(&v.to_le_bytes_vec());
        }
        tensors.push(TensorMeta {
            name,
            shape: t.shape().to_vec(),
            trainable,
            offset,
            len: t.numel(),
        });
    };
    for (name, entry) in store.iter() {
        push(name.to_string(), &entry.tensor, entry.trainable, &mut tensors);
    }
    let adam_meta = adam.map(|a| {
        let mut names: Vec<String> = a.moments().keys().cloned().collect();
        names.sort();
        for n in &names {
            let (m, v) = &a.moments()[n];
            push(format!("{n}.m"), m, false, &mut tensors);
            push(format!("{n}.v"), v, false, &mut tensors);
        }
        AdamMeta {
            step: a.step,
            lr: a.config.lr,
            beta1: a.config.beta1,
            beta2: a.config.beta2,
            eps: a.config.eps,
            params: names,
        }
    });
    let header = Header {
        magic: MAGIC.to_string(),
        dtype: T::DTYPE.to_string(),
        tensors,
        adam: adam_meta,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &header).map_err(|e| AdError::Checkpoint(e.to_string()))?;
    w.write_all(b"\n")?;
    w.write_all(&payload)?;
    Ok(())
}

pub fn load<T: Scalar>(path: &Path) -> Result<(ParamStore<T>, Option<AdamState<T>>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header_bytes = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)
            .map_err(|_| AdError::Checkpoint("truncated header".into()))?;
        if byte[0] == b'\n' {
            break;
        }
        header_bytes.push(byte[0]);
    }
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| AdError::Checkpoint(format!("bad header: {e}")))?;
    if header.magic != MAGIC {
        return Err(AdError::Checkpoint(format!(
            "bad magic `{}`",
            header.magic
        )));
    }
    if header.dtype != T::DTYPE {
        return Err(AdError::Checkpoint(format!(
            "dtype mismatch: file has {}, expected {}",
            header.dtype,
            T::DTYPE
        )));
    }
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;

    let read_tensor = |meta: &TensorMeta| -> Result<Tensor<T>> {
        let start = meta.offset;
        let end = start + meta.len * T::WIDTH;
        if end > payload.len() {
            return Err(AdError::Checkpoint(format!(
                "tensor `{}` extends past payload",
                meta.name
            )));
        }
        if meta.shape.iter().product::<usize>() != meta.len {
            return Err(AdError::Checkpoint(format!(
                "tensor `{}` shape/len mismatch",
                meta.name
            )));
        }
        let data: Vec<T> = payload[start..end]
            .chunks_exact(T::WIDTH)
            .map(T::from_le_slice)
            .collect();
        Ok(Tensor::from_vec(&meta.shape, data))
    };

    let mut store = ParamStore::new();
    let mut moment_tensors: Vec<(String, Tensor<T>)> = Vec::new();
    for meta in &header.tensors {
        let t = read_tensor(meta)?;
        if meta.name.ends_with(".m") || meta.name.ends_with(".v") {
            moment_tensors.push((meta.name.clone(), t));
        } else {
            store.insert(&meta.name, t, meta.trainable)?;
        }
    }
    let adam = match header.adam {
        None => None,
        Some(meta) => {
            let mut state = AdamState::new(AdamConfig {
                lr: meta.lr,
                beta1: meta.beta1,
                beta2: meta.beta2,
                eps: meta.eps,
            });
            state.step = meta.step;
            let lookup: std::collections::HashMap<String, Tensor<T>> =
                moment_tensors.into_iter().collect();
            for name in &meta.params {
                let m = lookup
                    .get(&format!("{name}.m"))
                    .ok_or_else(|| AdError::Checkpoint(format!("missing moment {name}.m")))?;
                let v = lookup
                    .get(&format!("{name}.v"))
                    .ok_or_else(|| AdError::Checkpoint(format!("missing moment {name}.v")))?;
                state.insert_moments(name.clone(), m.clone(), v.clone());
            }
            Some(state)
        }
    };
    Ok((store, adam))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_store_and_adam() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        let mut store = ParamStore::<f64>::new();
        store
            .insert("w", Tensor::from_vec(&[2, 2], vec![1.5, -2.0, 0.25, 9.0]), true)
            .unwrap();
        store
            .insert("bn.mean", Tensor::from_vec(&[2], vec![0.1, 0.2]), false)
            .unwrap();
        let mut adam = AdamState::new(AdamConfig::default());
        adam.insert_moments(
            "w".into(),
            Tensor::from_vec(&[2, 2], vec![0.1, 0.2, 0.3, 0.4]),
            Tensor::from_vec(&[2, 2], vec![0.5, 0.6, 0.7, 0.8]),
        );
        adam.step = 17;
        save(&path, &store, Some(&adam)).unwrap();

        let (store2, adam2) = load::<f64>(&path).unwrap();
        assert_eq!(store2.get("w").unwrap().data(), store.get("w").unwrap().data());
        assert_eq!(
            store2.get("bn.mean").unwrap().data(),
            store.get("bn.mean").unwrap().data()
        );
        let adam2 = adam2.unwrap();
        assert_eq!(adam2.step, 17);
        assert_eq!(adam2.moments()["w"].0.data(), &[0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn dtype_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        let mut store = ParamStore::<f32>::new();
        store.insert("w", Tensor::scalar(1.0), true).unwrap();
        save(&path, &store, None).unwrap();
        assert!(load::<f64>(&path).is_err());
    }
}
