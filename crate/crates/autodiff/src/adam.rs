//! Adam optimizer with bias correction.

use crate::params::ParamStore;
use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates per trainable parameter, keyed by name.
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub step: u64,
    moments: HashMap<String, (Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig) -> Self {
        AdamState {
            config,
            step: 0,
            moments: HashMap::new(),
        }
    }

    /// Apply one update to every trainable entry of `store` for which a
    /// gradient is supplied. Missing moment buffers are created lazily.
    pub fn step(
        &mut self,
        store: &mut ParamStore<T>,
        grads: &HashMap<String, Tensor<T>>,
    ) -> Result<()> {
        self.step += 1;
        let t = self.step as f64;
        let c = self.config;
        let bc1 = 1.0 - c.beta1.powf(t);
        let bc2 = 1.0 - c.beta2.powf(t);
        let beta1 = T::from_f64(c.beta1);
        let beta2 = T::from_f64(c.beta2);
        let one_minus_b1 = T::from_f64(1.0 - c.beta1);
        let one_minus_b2 = T::from_f64(1.0 - c.beta2);
        let lr = T::from_f64(c.lr);
        let eps = T::from_f64(c.eps);
        let bc1 = T::from_f64(bc1);
        let bc2 = T::from_f64(bc2);

        for name in store.trainable_names() {
            let Some(grad) = grads.get(&name) else {
                continue;
            };
            let param = store.get_mut(&name)?;
            if grad.shape() != param.shape() {
                return Err(AdError::ShapeMismatch {
                    op: "adam_step",
                    detail: format!(
                        "grad {:?} vs param {:?} for `{}`",
                        grad.shape(),
                        param.shape(),
                        name
                    ),
                });
            }
            let (m, v) = self
                .moments
                .entry(name.clone())
                .or_insert_with(|| (Tensor::zeros(grad.shape()), Tensor::zeros(grad.shape())));
            for ((p, &g), (mi, vi)) in param
                .data_mut()
                .iter_mut()
                .zip(grad.data())
                .zip(m.data_mut().iter_mut().zip(v.data_mut().iter_mut()))
            {
                *mi = beta1 * *mi + one_minus_b1 * g;
                *vi = beta2 * *vi + one_minus_b2 * g * g;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }

    pub fn moments(&self) -> &HashMap<String, (Tensor<T>, Tensor<T>)> {
        &self.moments
    }

    pub fn insert_moments(&mut self, name: String, m: Tensor<T>, v: Tensor<T>) {
        self.moments.insert(name, (m, v));
    }
}
