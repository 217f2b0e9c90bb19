//! Training loop, prediction, and the multi-repeat variant evaluation.

use super::augment::augment;
use super::net::{DlrNet, ForwardMode};
use super::{DlrArchSpec, DlrVariant, TrainConfig};
use crate::error::{CoreError, Result};
use crate::harness::{
    summarize, AggregateRow, CellFailure, EvaluationReport, RepeatMetrics, RepeatRow,
};
use crate::metrics::{auc, classification_metrics, roc_points};
use crate::phantom::cohort_split;
use crate::rng::{shuffled_indices, stream};
use crate::study::PreprocessedStudy;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use voxrad_autodiff::{ops, AdamConfig, AdamState, Graph, Scalar, Tensor};

/// Copy patch voxels (x-fastest) into tensor layout (z-fastest) as one
/// sample of a batch tensor.
fn fill_sample<T: Scalar>(dst: &mut [T], values: &[f32], dims: [usize; 3]) {
    let [nx, ny, nz] = dims;
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                dst[(x * ny + y) * nz + z] = T::from_f64(values[(z * ny + y) * nx + x] as f64);
            }
        }
    }
}

fn batch_tensor<T: Scalar>(samples: &[Vec<f32>], dims: [usize; 3]) -> Tensor<T> {
    let [nx, ny, nz] = dims;
    let per = nx * ny * nz;
    let mut t = Tensor::zeros(&[samples.len(), 1, nx, ny, nz]);
    for (i, s) in samples.iter().enumerate() {
        fill_sample(&mut t.data_mut()[i * per..(i + 1) * per], s, dims);
    }
    t
}

fn tnm_tensor<T: Scalar>(values: &[f64]) -> Tensor<T> {
    Tensor::from_vec(
        &[values.len(), 1],
        values.iter().map(|&v| T::from_f64(v)).collect(),
    )
}

pub struct TrainRun<T: Scalar> {
    pub net: DlrNet<T>,
    /// Mean training cross-entropy per epoch.
    pub loss_curve: Vec<f64>,
    pub best_epoch: usize,
}

/// Train one network on the given studies (the training split only).
/// Mini-batches are reshuffled per epoch and re-augmented per draw; early
/// stopping watches the epoch training loss and the best-loss snapshot is
/// restored at the end.
pub fn train<T: Scalar>(
    studies: &[&PreprocessedStudy],
    arch: &DlrArchSpec,
    cfg: &TrainConfig,
) -> Result<TrainRun<T>> {
    if studies.is_empty() {
        return Err(CoreError::InvalidParameter("empty training set".into()));
    }
    let dims = studies[0].pet.dims;
    if dims != arch.input_dims {
        return Err(CoreError::GeometryMismatch(format!(
            "patches are {:?} but the architecture expects {:?}",
            dims, arch.input_dims
        )));
    }
    let mut batch_size = cfg.batch_size.max(1);
    if batch_size > studies.len() {
        eprintln!(
            "warning: batch size {} exceeds cohort size {}; shrinking",
            batch_size,
            studies.len()
        );
        batch_size = studies.len();
    }

    let mut net = DlrNet::<T>::build(arch, cfg.seed)?;
    let mut adam = AdamState::new(AdamConfig {
        lr: cfg.learning_rate,
        ..AdamConfig::default()
    });

    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_snapshot = net.snapshot()?;
    let mut since_improve = 0usize;
    let mut loss_curve = Vec::new();
    let mut step: u64 = 0;

    for epoch in 0..cfg.max_epochs {
        let mut order_rng = stream(cfg.seed, "shuffle", &[epoch as u64]);
        let order = shuffled_indices(studies.len(), &mut order_rng);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(batch_size) {
            // Assemble (optionally augmented) inputs.
            let mut pets = Vec::with_capacity(batch.len());
            let mut cts = Vec::with_capacity(batch.len());
            let mut tnm = Vec::with_capacity(batch.len());
            let mut labels = Vec::with_capacity(batch.len());
            for &si in batch {
                let s = studies[si];
                let mut aug_rng = stream(cfg.seed, "augment", &[epoch as u64, si as u64]);
                let (pet, ct) = if cfg.augment.enabled {
                    augment(&s.pet.voxels, &s.ct.voxels, dims, &cfg.augment, &mut aug_rng)
                } else {
                    (s.pet.voxels.clone(), s.ct.voxels.clone())
                };
                pets.push(pet);
                cts.push(ct);
                tnm.push(s.tnm_stage.encoded());
                labels.push(s.label as usize);
            }
            let pet_t = arch.variant.uses_pet().then(|| batch_tensor::<T>(&pets, dims));
            let ct_t = arch.variant.uses_ct().then(|| batch_tensor::<T>(&cts, dims));
            let tnm_t = arch.variant.uses_tnm().then(|| tnm_tensor::<T>(&tnm));

            let mut g = Graph::new();
            let (logits, param_ids) = net.forward(
                &mut g,
                pet_t.as_ref(),
                ct_t.as_ref(),
                tnm_t.as_ref(),
                ForwardMode::Train,
                cfg.seed,
                step,
            )?;
            let (loss, _probs) = ops::softmax_xent(&mut g, logits, &labels)?;
            let loss_value = g.value(loss).item().as_f64();
            g.backward(loss)?;

            let mut grads: HashMap<String, Tensor<T>> = HashMap::new();
            for (name, id) in &param_ids {
                if let Some(grad) = g.grad(*id) {
                    grads.insert(name.clone(), grad.clone());
                }
            }
            adam.step(&mut net.store, &grads)?;

            epoch_loss += loss_value * batch.len() as f64;
            seen += batch.len();
            step += 1;
        }
        let epoch_loss = epoch_loss / seen as f64;
        loss_curve.push(epoch_loss);

        if epoch_loss < best_loss - cfg.min_delta {
            best_loss = epoch_loss;
            best_epoch = epoch;
            best_snapshot = net.snapshot()?;
            since_improve = 0;
        } else {
            since_improve += 1;
            if since_improve >= cfg.patience {
                break;
            }
        }
    }
    net.restore(&best_snapshot)?;
    Ok(TrainRun {
        net,
        loss_curve,
        best_epoch,
    })
}

/// Relapse probabilities (softmax class-1 output) for a set of studies.
/// Evaluation mode: no augmentation, running batch-norm statistics.
pub fn predict_probability<T: Scalar>(
    net: &mut DlrNet<T>,
    studies: &[&PreprocessedStudy],
) -> Result<Vec<f64>> {
    if studies.is_empty() {
        return Ok(vec![]);
    }
    let dims = studies[0].pet.dims;
    if dims != net.spec.input_dims {
        return Err(CoreError::GeometryMismatch(format!(
            "patches are {:?} but the model expects {:?}",
            dims, net.spec.input_dims
        )));
    }
    let variant = net.spec.variant;
    let pets: Vec<Vec<f32>> = studies.iter().map(|s| s.pet.voxels.clone()).collect();
    let cts: Vec<Vec<f32>> = studies.iter().map(|s| s.ct.voxels.clone()).collect();
    let tnm: Vec<f64> = studies.iter().map(|s| s.tnm_stage.encoded()).collect();
    let pet_t = variant.uses_pet().then(|| batch_tensor::<T>(&pets, dims));
    let ct_t = variant.uses_ct().then(|| batch_tensor::<T>(&cts, dims));
    let tnm_t = variant.uses_tnm().then(|| tnm_tensor::<T>(&tnm));

    let mut g = Graph::new();
    let (logits, _) = net.forward(
        &mut g,
        pet_t.as_ref(),
        ct_t.as_ref(),
        tnm_t.as_ref(),
        ForwardMode::Eval,
        0,
        0,
    )?;
    let dummy_labels = vec![0usize; studies.len()];
    let (_, probs) = ops::softmax_xent(&mut g, logits, &dummy_labels)?;
    Ok(probs
        .data()
        .chunks(2)
        .map(|row| row[1].as_f64())
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DlrEvalConfig {
    pub variants: Vec<DlrVariant>,
    pub n_repeats: usize,
    pub n_train: usize,
    pub n_valid: usize,
    pub master_seed: u64,
    pub arch: DlrArchSpec,
    pub train: TrainConfig,
}

impl Default for DlrEvalConfig {
    fn default() -> Self {
        DlrEvalConfig {
            variants: DlrVariant::ALL.to_vec(),
            n_repeats: 10,
            n_train: 120,
            n_valid: 50,
            master_seed: 7,
            arch: DlrArchSpec::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Train and evaluate every requested variant over the repeated-split
/// protocol; the report reuses the benchmark schema with one row per
/// variant ("DLR" as the selector column).
pub fn evaluate_variants<T: Scalar>(
    studies: &[PreprocessedStudy],
    config: &DlrEvalConfig,
) -> Result<EvaluationReport> {
    let n = studies.len();
    if config.n_train + config.n_valid != n {
        return Err(CoreError::SizeMismatch(format!(
            "train {} + valid {} != cohort {}",
            config.n_train, config.n_valid, n
        )));
    }
    let mut tasks = Vec::new();
    for (vi, &variant) in config.variants.iter().enumerate() {
        for r in 0..config.n_repeats {
            tasks.push((vi, variant, r));
        }
    }

    let results: Vec<std::result::Result<RepeatMetrics, String>> = tasks
        .par_iter()
        .map(|&(vi, variant, r)| {
            let run = || -> Result<RepeatMetrics> {
                let (train_idx, valid_idx) =
                    cohort_split(n, config.n_train, config.n_valid, r, config.master_seed)?;
                let train_set: Vec<&PreprocessedStudy> =
                    train_idx.iter().map(|&i| &studies[i]).collect();
                let valid_set: Vec<&PreprocessedStudy> =
                    valid_idx.iter().map(|&i| &studies[i]).collect();
                let arch = DlrArchSpec {
                    variant,
                    ..config.arch
                };
                let run_seed = stream(
                    config.master_seed,
                    "dlr-run",
                    &[vi as u64, r as u64],
                )
                .random::<u64>();
                let cfg = TrainConfig {
                    seed: run_seed,
                    ..config.train.clone()
                };
                let mut trained = train::<T>(&train_set, &arch, &cfg)?;
                let probs = predict_probability(&mut trained.net, &valid_set)?;
                let y_valid: Vec<u8> = valid_set.iter().map(|s| s.label).collect();
                let labels_hat: Vec<u8> = probs.iter().map(|&p| u8::from(p >= 0.5)).collect();
                let cls = classification_metrics(&labels_hat, &y_valid)?;
                Ok(RepeatMetrics {
                    auc: auc(&probs, &y_valid)?,
                    testing_error: cls.testing_error,
                    precision: cls.precision,
                    recall: cls.recall,
                    f1: cls.f1,
                    roc: roc_points(&probs, &y_valid)?,
                    chosen_k: None,
                    cv_mean_auc: None,
                })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();

    let mut per_repeat = Vec::new();
    let mut failures = Vec::new();
    for (&(_, variant, r), result) in tasks.iter().zip(results.into_iter()) {
        match result {
            Ok(metrics) => per_repeat.push(RepeatRow {
                selector: "DLR".into(),
                classifier: variant.name().into(),
                repeat: r,
                metrics,
            }),
            Err(reason) => failures.push(CellFailure {
                selector: "DLR".into(),
                classifier: variant.name().into(),
                repeat: r,
                reason,
            }),
        }
    }

    let mut aggregates = Vec::new();
    for &variant in &config.variants {
        let rows: Vec<&RepeatRow> = per_repeat
            .iter()
            .filter(|row| row.classifier == variant.name())
            .collect();
        if rows.is_empty() {
            continue;
        }
        let collect = |f: fn(&RepeatMetrics) -> f64| -> Vec<f64> {
            rows.iter().map(|row| f(&row.metrics)).collect()
        };
        aggregates.push(AggregateRow {
            selector: "DLR".into(),
            classifier: variant.name().into(),
            n_repeats: rows.len(),
            auc: summarize(&collect(|m| m.auc)),
            testing_error: summarize(&collect(|m| m.testing_error)),
            precision: summarize(&collect(|m| m.precision)),
            recall: summarize(&collect(|m| m.recall)),
            f1: summarize(&collect(|m| m.f1)),
        });
    }

    Ok(EvaluationReport {
        selectors: vec!["DLR".into()],
        classifiers: config.variants.iter().map(|v| v.name().to_string()).collect(),
        per_repeat,
        aggregates,
        failures,
    })
}

/// Write the per-epoch loss curve as CSV.
pub fn write_loss_curve(curve: &[f64], path: &std::path::Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "loss"])?;
    for (i, loss) in curve.iter().enumerate() {
        w.write_record([format!("{i}"), format!("{loss}")])?;
    }
    w.flush()
        .map_err(|e| CoreError::io(path.display().to_string(), e))?;
    Ok(())
}
