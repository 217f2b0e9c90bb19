//! Deep-learning radiomics: the two-branch volumetric CNN, its
//! input-ablation variants, real-time augmentation, training, and
//! evaluation.

pub mod augment;
mod net;
mod train;

pub use augment::{augment, AugmentConfig, RotationMode};
pub use net::{DlrNet, ForwardMode, LayerShape};
pub use net::derive_layer_table;
pub use train::{
    evaluate_variants, predict_probability, train, write_loss_curve, DlrEvalConfig, TrainRun,
};

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DlrVariant {
    /// PET + CT + TNM stage.
    Pct,
    /// PET + CT.
    Pc,
    /// PET + TNM stage.
    Pt,
    /// CT + TNM stage.
    Ct,
}

impl DlrVariant {
    pub const ALL: [DlrVariant; 4] = [
        DlrVariant::Pct,
        DlrVariant::Pc,
        DlrVariant::Pt,
        DlrVariant::Ct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DlrVariant::Pct => "PCT",
            DlrVariant::Pc => "PC",
            DlrVariant::Pt => "PT",
            DlrVariant::Ct => "CT",
        }
    }

    pub fn uses_pet(self) -> bool {
        !matches!(self, DlrVariant::Ct)
    }

    pub fn uses_ct(self) -> bool {
        !matches!(self, DlrVariant::Pt)
    }

    /// TNM joins every variant except the image-only PC model.
    pub fn uses_tnm(self) -> bool {
        !matches!(self, DlrVariant::Pc)
    }

    pub fn n_image_branches(self) -> usize {
        usize::from(self.uses_pet()) + usize::from(self.uses_ct())
    }
}

impl std::str::FromStr for DlrVariant {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PCT" => Ok(DlrVariant::Pct),
            "PC" => Ok(DlrVariant::Pc),
            "PT" => Ok(DlrVariant::Pt),
            "CT" => Ok(DlrVariant::Ct),
            other => Err(CoreError::InvalidParameter(format!(
                "unknown variant `{other}` (expected PCT, PC, PT or CT)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DlrArchSpec {
    pub variant: DlrVariant,
    pub input_dims: [usize; 3],
    /// Channel scale in (0,1]; widths round up with a floor of 1.
    pub alpha: f64,
    pub dropout: f64,
}

impl Default for DlrArchSpec {
    fn default() -> Self {
        DlrArchSpec {
            variant: DlrVariant::Pct,
            input_dims: [80, 80, 64],
            alpha: 1.0,
            dropout: 0.5,
        }
    }
}

impl DlrArchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "alpha must be in (0,1], got {}",
                self.alpha
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(CoreError::InvalidParameter(format!(
                "dropout must be in [0,1), got {}",
                self.dropout
            )));
        }
        // Four stride-2 stages need each extent divisible by 16.
        for (axis, &d) in self.input_dims.iter().enumerate() {
            if d == 0 || d % 16 != 0 {
                return Err(CoreError::InvalidParameter(format!(
                    "input dim {d} on axis {axis} must be a positive multiple of 16"
                )));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, base: usize) -> usize {
        ((base as f64 * self.alpha).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Epochs without an improvement of at least `min_delta` before
    /// training stops.
    pub patience: usize,
    pub min_delta: f64,
    pub augment: AugmentConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            learning_rate: 1e-4,
            max_epochs: 100,
            patience: 10,
            min_delta: 1e-4,
            augment: AugmentConfig::default(),
            seed: 7,
        }
    }
}
