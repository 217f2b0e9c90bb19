//! Pipeline configuration: one JSON document drives every stage. Unknown
//! keys are rejected, defaults are materialized on load, and the effective
//! config (with every defaulted value spelled out) is emitted next to the
//! outputs so a run can be replayed exactly.

use crate::dlr::DlrEvalConfig;
use crate::error::{CoreError, Result};
use crate::features::FeatureConfig;
use crate::harness::ExperimentConfig;
use crate::phantom::PhantomSpec;
use crate::study::PreprocessParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; stages derive their own streams from it.
    pub seed: Option<u64>,
    pub phantom: PhantomSpec,
    pub preprocess: PreprocessParams,
    pub features: FeatureConfig,
    pub experiment: ExperimentConfig,
    pub dlr: DlrEvalConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::io(path.display().to_string(), e))?;
        let config: PipelineConfig = serde_json::from_str(&text).map_err(|e| {
            CoreError::Config(format!("{}: {e}", path.display()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.phantom.validate()?;
        self.dlr.arch.validate()?;
        if self.experiment.n_repeats == 0 {
            return Err(CoreError::Config("n_repeats must be >= 1".into()));
        }
        if self.experiment.n_train + self.experiment.n_valid != self.phantom.n {
            return Err(CoreError::Config(format!(
                "experiment sizes {}+{} must sum to the cohort size {}",
                self.experiment.n_train, self.experiment.n_valid, self.phantom.n
            )));
        }
        Ok(())
    }

    /// The seed every stage actually uses: explicit `seed` wins, otherwise
    /// the experiment's master seed.
    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(self.experiment.master_seed)
    }

    /// Copy with the master seed propagated into each stage config.
    pub fn with_propagated_seed(mut self) -> Self {
        let seed = self.effective_seed();
        self.seed = Some(seed);
        self.phantom.seed = seed;
        self.experiment.master_seed = seed;
        self.dlr.master_seed = seed;
        self
    }

    /// Serialize with every default materialized.
    pub fn effective_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// FNV-1a hash of the effective JSON; identifies a run in manifests.
    pub fn content_hash(&self) -> Result<String> {
        let json = self.effective_json()?;
        let mut hash: u64 = 0xcbf29ce484222325;
        for b in json.as_bytes() {
            hash ^= u64::from(*b);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        Ok(format!("{hash:016x}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_roundtrip() {
        let config = PipelineConfig::default();
        config.validate().unwrap();
        let json = config.effective_json().unwrap();
        let back: PipelineConfig = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(config.content_hash().unwrap(), back.content_hash().unwrap());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<PipelineConfig>(r#"{"no_such_key": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn seed_propagation() {
        let config = PipelineConfig {
            seed: Some(99),
            ..Default::default()
        }
        .with_propagated_seed();
        assert_eq!(config.phantom.seed, 99);
        assert_eq!(config.experiment.master_seed, 99);
        assert_eq!(config.dlr.master_seed, 99);
    }

    #[test]
    fn mismatched_cohort_sizes_rejected() {
        let mut config = PipelineConfig::default();
        config.experiment.n_train = 100;
        assert!(config.validate().is_err());
    }
}
