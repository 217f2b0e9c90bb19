//! Volumetric radiomics and prognosis workbench.
//!
//! The crate covers the full study pipeline:
//!
//! - [`imaging`]: volume container, file I/O, SUV conversion, isotropic
//!   resampling, ROI crop and intensity normalization.
//! - [`phantom`]: synthetic PET/CT cohorts with known generative structure.
//! - [`features`]: handcrafted radiomics (first-order, GLCM, GLRLM, GLSZM,
//!   NGTDM, 3D shape, wavelet sub-bands) assembling 1456-feature vectors.
//! - [`cr`]: six feature selectors and nine classifiers with a uniform
//!   fit/predict contract plus stratified cross-validation.
//! - [`harness`]: the 54-combination benchmark grid, repeated-split
//!   protocol, metrics, and report emission.
//! - [`dlr`]: the two-branch volumetric CNN, its input-ablation variants,
//!   augmentation, training loop, and evaluation.

pub mod config;
pub mod cr;
pub mod dlr;
pub mod error;
pub mod features;
pub mod harness;
pub mod imaging;
pub mod manifest;
pub mod metrics;
pub mod phantom;
pub mod rng;
pub mod stats;
pub mod study;

pub use error::{CoreError, Result};
