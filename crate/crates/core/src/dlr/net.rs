//! The two-branch volumetric CNN.
//!
//! Per image branch: five convolutions of 16/32/64/128/256 filters with
//! kernels 5/3/3/3/3, the middle four at stride 2, each followed by batch
//! normalization and an ELU. Branch outputs are concatenated on the channel
//! axis into a sixth convolution (768 filters, kernel 3), flattened, and
//! fed through fully-connected layers of 1024/512/256/2 units; FC1-3 carry
//! ReLU + dropout, the clinical covariate joins after FC3, and FC4 feeds a
//! two-class softmax. Channel widths scale by alpha.

use super::{DlrArchSpec, DlrVariant};
use crate::error::Result;
use crate::rng::stream;
use serde::{Deserialize, Serialize};
use voxrad_autodiff::graph::NodeId;
use voxrad_autodiff::tensor::fill_normal;
use voxrad_autodiff::{ops, Graph, ParamStore, RunningStats, Scalar, Tensor};

const BRANCH_FILTERS: [usize; 5] = [16, 32, 64, 128, 256];
const BRANCH_KERNELS: [usize; 5] = [5, 3, 3, 3, 3];
const BRANCH_STRIDES: [usize; 5] = [1, 2, 2, 2, 2];
const CONV6_FILTERS: usize = 768;
const FC_UNITS: [usize; 3] = [1024, 512, 256];
const CLASSES: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub name: String,
    /// Channels for conv layers, units for dense layers.
    pub channels: usize,
    /// Spatial extent (x, y, z); empty for dense layers.
    pub spatial: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardMode {
    Train,
    Eval,
}

pub struct DlrNet<T: Scalar> {
    pub spec: DlrArchSpec,
    pub store: ParamStore<T>,
    /// Running statistics per batch-norm layer, in layer order.
    bn_stats: Vec<(String, RunningStats<T>)>,
    layer_table: Vec<LayerShape>,
}

/// Layer table derived from the architecture spec alone.
pub fn derive_layer_table(spec: &DlrArchSpec) -> Vec<LayerShape> {
    let mut table = Vec::new();
    let mut dims = spec.input_dims;
    let branches: Vec<&str> = match spec.variant {
        DlrVariant::Pct | DlrVariant::Pc => vec!["pet", "ct"],
        DlrVariant::Pt => vec!["pet"],
        DlrVariant::Ct => vec!["ct"],
    };
    for b in &branches {
        table.push(LayerShape {
            name: format!("input_{b}"),
            channels: 1,
            spatial: spec.input_dims.to_vec(),
        });
    }
    for (i, ((&filters, &_kernel), &stride)) in BRANCH_FILTERS
        .iter()
        .zip(BRANCH_KERNELS.iter())
        .zip(BRANCH_STRIDES.iter())
        .enumerate()
    {
        dims = [
            dims[0].div_ceil(stride),
            dims[1].div_ceil(stride),
            dims[2].div_ceil(stride),
        ];
        for b in &branches {
            table.push(LayerShape {
                name: format!("conv{}_{b}", i + 1),
                channels: spec.scaled(filters),
                spatial: dims.to_vec(),
            });
        }
    }
    table.push(LayerShape {
        name: "conv6".into(),
        channels: spec.scaled(CONV6_FILTERS),
        spatial: dims.to_vec(),
    });
    for (i, &units) in FC_UNITS.iter().enumerate() {
        table.push(LayerShape {
            name: format!("fc{}", i + 1),
            channels: spec.scaled(units),
            spatial: vec![],
        });
    }
    table.push(LayerShape {
        name: "fc4".into(),
        channels: CLASSES,
        spatial: vec![],
    });
    table
}

impl<T: Scalar> DlrNet<T> {
    /// Allocate and initialize all parameters. Deterministic per seed.
    pub fn build(spec: &DlrArchSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut store = ParamStore::new();
        let mut bn_stats = Vec::new();
        let mut layer_idx = 0u64;

        let mut add_conv = |store: &mut ParamStore<T>,
                            bn_stats: &mut Vec<(String, RunningStats<T>)>,
                            name: &str,
                            c_in: usize,
                            c_out: usize,
                            k: usize|
         -> Result<()> {
            let fan_in = (c_in * k * k * k) as f64;
            let mut w = Tensor::zeros(&[c_out, c_in, k, k, k]);
            let mut rng = stream(seed, "init", &[layer_idx]);
            layer_idx += 1;
            fill_normal(&mut w, (2.0 / fan_in).sqrt(), &mut rng);
            store.insert(&format!("{name}.w"), w, true)?;
            store.insert(&format!("{name}.b"), Tensor::zeros(&[c_out]), true)?;
            store.insert(&format!("{name}.gamma"), Tensor::filled(&[c_out], T::one()), true)?;
            store.insert(&format!("{name}.beta"), Tensor::zeros(&[c_out]), true)?;
            bn_stats.push((name.to_string(), RunningStats::new(c_out)));
            Ok(())
        };

        let branches: Vec<&str> = match spec.variant {
            DlrVariant::Pct | DlrVariant::Pc => vec!["pet", "ct"],
            DlrVariant::Pt => vec!["pet"],
            DlrVariant::Ct => vec!["ct"],
        };
        for b in &branches {
            let mut c_in = 1;
            for (i, (&filters, &k)) in BRANCH_FILTERS.iter().zip(BRANCH_KERNELS.iter()).enumerate()
            {
                let c_out = spec.scaled(filters);
                add_conv(
                    &mut store,
                    &mut bn_stats,
                    &format!("conv{}_{b}", i + 1),
                    c_in,
                    c_out,
                    k,
                )?;
                c_in = c_out;
            }
        }
        let fused_channels = spec.scaled(BRANCH_FILTERS[4]) * branches.len();
        add_conv(
            &mut store,
            &mut bn_stats,
            "conv6",
            fused_channels,
            spec.scaled(CONV6_FILTERS),
            3,
        )?;

        let spatial_out: usize = spec.input_dims.iter().map(|d| d / 16).product();
        let mut fc_in = spec.scaled(CONV6_FILTERS) * spatial_out;
        for (i, &units) in FC_UNITS.iter().enumerate() {
            let out = spec.scaled(units);
            let mut w = Tensor::zeros(&[out, fc_in]);
            let mut rng = stream(seed, "init", &[layer_idx]);
            layer_idx += 1;
            fill_normal(&mut w, (2.0 / fc_in as f64).sqrt(), &mut rng);
            store.insert(&format!("fc{}.w", i + 1), w, true)?;
            store.insert(&format!("fc{}.b", i + 1), Tensor::zeros(&[out]), true)?;
            fc_in = out;
        }
        if spec.variant.uses_tnm() {
            fc_in += 1;
        }
        let mut w = Tensor::zeros(&[CLASSES, fc_in]);
        let mut rng = stream(seed, "init", &[layer_idx]);
        fill_normal(&mut w, (2.0 / fc_in as f64).sqrt(), &mut rng);
        store.insert("fc4.w", w, true)?;
        store.insert("fc4.b", Tensor::zeros(&[CLASSES]), true)?;

        Ok(DlrNet {
            spec: *spec,
            store,
            bn_stats,
            layer_table: derive_layer_table(spec),
        })
    }

    /// Construction-time census: every layer's channels and spatial dims.
    pub fn census(&self) -> &[LayerShape] {
        &self.layer_table
    }

    pub fn bn_running_stats(&self) -> &[(String, RunningStats<T>)] {
        &self.bn_stats
    }

    fn bn_index(&self, name: &str) -> usize {
        self.bn_stats
            .iter()
            .position(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("unknown bn layer {name}"))
    }

    /// One forward pass on a fresh tape. Returns the logits node and the
    /// tape ids of every trainable parameter (for gradient collection).
    #[allow(clippy::too_many_arguments)]
    pub fn forward(
        &mut self,
        g: &mut Graph<T>,
        pet: Option<&Tensor<T>>,
        ct: Option<&Tensor<T>>,
        tnm: Option<&Tensor<T>>,
        mode: ForwardMode,
        dropout_seed: u64,
        step: u64,
    ) -> Result<(NodeId, Vec<(String, NodeId)>)> {
        let train = mode == ForwardMode::Train;
        let mut param_ids: Vec<(String, NodeId)> = Vec::new();

        // Register every trainable parameter on the tape.
        let names: Vec<String> = self.store.names().to_vec();
        let mut node_of = std::collections::HashMap::new();
        for name in &names {
            let tensor = self.store.get(name)?.clone();
            let id = g.param(tensor);
            node_of.insert(name.clone(), id);
            param_ids.push((name.clone(), id));
        }

        let mut branch_outputs = Vec::new();
        let branch_inputs: Vec<(&str, Option<&Tensor<T>>)> = match self.spec.variant {
            DlrVariant::Pct | DlrVariant::Pc => vec![("pet", pet), ("ct", ct)],
            DlrVariant::Pt => vec![("pet", pet)],
            DlrVariant::Ct => vec![("ct", ct)],
        };
        for (branch, input) in branch_inputs {
            let input = input.ok_or_else(|| {
                crate::error::CoreError::InvalidParameter(format!(
                    "variant {} requires a {branch} input",
                    self.spec.variant.name()
                ))
            })?;
            let mut x = g.leaf(input.clone());
            for (i, &stride) in BRANCH_STRIDES.iter().enumerate() {
                let name = format!("conv{}_{branch}", i + 1);
                x = self.conv_block(g, x, &name, stride, train, &node_of)?;
            }
            branch_outputs.push(x);
        }
        let fused = if branch_outputs.len() == 1 {
            branch_outputs[0]
        } else {
            ops::concat(g, &branch_outputs, 1)?
        };
        let conv6 = self.conv_block(g, fused, "conv6", 1, train, &node_of)?;

        // Flatten into the dense stack.
        let shape = g.value(conv6).shape().to_vec();
        let n = shape[0];
        let flat: usize = shape[1..].iter().product();
        let mut x = ops::reshape(g, conv6, &[n, flat])?;
        for i in 0..FC_UNITS.len() {
            let w = node_of[&format!("fc{}.w", i + 1)];
            let b = node_of[&format!("fc{}.b", i + 1)];
            x = ops::dense(g, x, w, b)?;
            x = ops::relu(g, x)?;
            let mut rng = stream(dropout_seed, "dropout", &[i as u64, step]);
            x = ops::dropout(g, x, self.spec.dropout, train, &mut rng)?;
        }
        if self.spec.variant.uses_tnm() {
            let tnm = tnm.ok_or_else(|| {
                crate::error::CoreError::InvalidParameter(format!(
                    "variant {} requires a TNM input",
                    self.spec.variant.name()
                ))
            })?;
            let tnm_node = g.leaf(tnm.clone());
            x = ops::concat(g, &[x, tnm_node], 1)?;
        }
        let logits = ops::dense(g, x, node_of["fc4.w"], node_of["fc4.b"])?;
        Ok((logits, param_ids))
    }

    fn conv_block(
        &mut self,
        g: &mut Graph<T>,
        x: NodeId,
        name: &str,
        stride: usize,
        train: bool,
        node_of: &std::collections::HashMap<String, NodeId>,
    ) -> Result<NodeId> {
        let w = node_of[&format!("{name}.w")];
        let b = node_of[&format!("{name}.b")];
        let gamma = node_of[&format!("{name}.gamma")];
        let beta = node_of[&format!("{name}.beta")];
        let conv = ops::conv3d(g, x, w, b, stride)?;
        let idx = self.bn_index(name);
        let mode = if train {
            ops::BnMode::Train
        } else {
            ops::BnMode::Eval
        };
        let bn = ops::batch_norm(g, conv, gamma, beta, &mut self.bn_stats[idx].1, mode)?;
        Ok(ops::elu(g, bn)?)
    }

    /// Merge batch-norm buffers into a store snapshot for checkpointing.
    pub fn snapshot(&self) -> Result<ParamStore<T>> {
        let mut merged = self.store.clone();
        for (name, stats) in &self.bn_stats {
            merged.insert(&format!("{name}.running_mean"), stats.mean.clone(), false)?;
            merged.insert(&format!("{name}.running_var"), stats.var.clone(), false)?;
        }
        Ok(merged)
    }

    /// Inverse of [`snapshot`].
    pub fn restore(&mut self, merged: &ParamStore<T>) -> Result<()> {
        for name in self.store.names().to_vec() {
            let tensor = merged.get(&name)?.clone();
            self.store.set(&name, tensor)?;
        }
        for (name, stats) in self.bn_stats.iter_mut() {
            stats.mean = merged.get(&format!("{name}.running_mean"))?.clone();
            stats.var = merged.get(&format!("{name}.running_var"))?.clone();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pct_layer_table_at_full_scale() {
        let spec = DlrArchSpec::default();
        let table = derive_layer_table(&spec);
        let find = |name: &str| table.iter().find(|l| l.name == name).unwrap();
        assert_eq!(find("conv1_pet").spatial, vec![80, 80, 64]);
        assert_eq!(find("conv2_pet").spatial, vec![40, 40, 32]);
        assert_eq!(find("conv3_ct").spatial, vec![20, 20, 16]);
        assert_eq!(find("conv4_ct").spatial, vec![10, 10, 8]);
        assert_eq!(find("conv5_pet").spatial, vec![5, 5, 4]);
        assert_eq!(find("conv6").spatial, vec![5, 5, 4]);
        assert_eq!(find("conv6").channels, 768);
        assert_eq!(find("fc1").channels, 1024);
        assert_eq!(find("fc4").channels, 2);
    }

    #[test]
    fn variant_branch_and_tnm_rules() {
        for variant in DlrVariant::ALL {
            let spec = DlrArchSpec {
                variant,
                input_dims: [16, 16, 16],
                alpha: 1.0 / 16.0,
                dropout: 0.0,
            };
            let net = DlrNet::<f64>::build(&spec, 3).unwrap();
            let has_pet = net.store.contains("conv1_pet.w");
            let has_ct = net.store.contains("conv1_ct.w");
            assert_eq!(has_pet, variant.uses_pet(), "{variant:?}");
            assert_eq!(has_ct, variant.uses_ct(), "{variant:?}");
            // TNM contributes exactly one extra FC4 input when present.
            let fc4 = net.store.get("fc4.w").unwrap();
            let fc3_out = spec.scaled(256);
            let expect = fc3_out + usize::from(variant.uses_tnm());
            assert_eq!(fc4.shape()[1], expect, "{variant:?}");
        }
    }

    #[test]
    fn non_multiple_of_16_rejected() {
        let spec = DlrArchSpec {
            input_dims: [80, 80, 60],
            ..Default::default()
        };
        assert!(DlrNet::<f32>::build(&spec, 0).is_err());
    }

    #[test]
    fn tiny_forward_shapes_and_softmax() {
        let spec = DlrArchSpec {
            variant: DlrVariant::Pct,
            input_dims: [16, 16, 16],
            alpha: 1.0 / 16.0,
            dropout: 0.0,
        };
        let mut net = DlrNet::<f64>::build(&spec, 1).unwrap();
        let mut g = Graph::new();
        let pet = Tensor::filled(&[2, 1, 16, 16, 16], 0.3);
        let ct = Tensor::filled(&[2, 1, 16, 16, 16], -0.1);
        let tnm = Tensor::from_vec(&[2, 1], vec![0.0, 1.0]);
        let (logits, _) = net
            .forward(
                &mut g,
                Some(&pet),
                Some(&ct),
                Some(&tnm),
                ForwardMode::Train,
                9,
                0,
            )
            .unwrap();
        assert_eq!(g.value(logits).shape(), &[2, 2]);
        let (_, probs) = ops::softmax_xent(&mut g, logits, &[0, 1]).unwrap();
        for row in probs.data().chunks(2) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
