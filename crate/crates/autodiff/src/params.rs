//! Named parameter storage shared across training steps.
//!
//! The tape is rebuilt every step; parameters live here and are copied onto
//! the tape as `param` leaves. Entry order is insertion order and is part of
//! the checkpoint contract.

use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};
use std::collections::HashMap;

/// Per-channel running statistics for batch normalization (eval mode).
#[derive(Clone)]
pub struct RunningStats<T> {
    pub mean: Tensor<T>,
    pub var: Tensor<T>,
}

impl<T: Scalar> RunningStats<T> {
    pub fn new(channels: usize) -> Self {
        RunningStats {
            mean: Tensor::zeros(&[channels]),
            var: Tensor::filled(&[channels], T::one()),
        }
    }
}

#[derive(Clone)]
pub struct ParamEntry<T> {
    pub tensor: Tensor<T>,
    pub trainable: bool,
}

/// Ordered map of named tensors: trainable parameters plus persistent
/// buffers (batch-norm running statistics).
#[derive(Clone, Default)]
pub struct ParamStore<T> {
    names: Vec<String>,
    index: HashMap<String, usize>,
    entries: Vec<ParamEntry<T>>,
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore {
            names: Vec::new(),
            index: HashMap::new(),
            entries: Vec::new(),
        }
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor<T>, trainable: bool) -> Result<()> {
        if self.index.contains_key(name) {
            return Err(AdError::DuplicateParam(name.to_string()));
        }
        self.index.insert(name.to_string(), self.entries.len());
        self.names.push(name.to_string());
        self.entries.push(ParamEntry { tensor, trainable });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Tensor<T>> {
        self.index
            .get(name)
            .map(|&i| &self.entries[i].tensor)
            .ok_or_else(|| AdError::UnknownParam(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor<T>> {
        match self.index.get(name) {
            Some(&i) => Ok(&mut self.entries[i].tensor),
            None => Err(AdError::UnknownParam(name.to_string())),
        }
    }

    pub fn set(&mut self, name: &str, tensor: Tensor<T>) -> Result<()> {
        let slot = self.get_mut(name)?;
        assert_eq!(slot.shape(), tensor.shape(), "set: shape change for {name}");
        *slot = tensor;
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamEntry<T>)> {
        self.names
            .iter()
            .map(|n| n.as_str())
            .zip(self.entries.iter())
    }

    /// Names of trainable entries, in insertion order.
    pub fn trainable_names(&self) -> Vec<String> {
        self.iter()
            .filter(|(_, e)| e.trainable)
            .map(|(n, _)| n.to_string())
            .collect()
    }

    /// Total number of scalar elements across trainable entries.
    pub fn trainable_numel(&self) -> usize {
        self.iter()
            .filter(|(_, e)| e.trainable)
            .map(|(_, e)| e.tensor.numel())
            .sum()
    }
}
