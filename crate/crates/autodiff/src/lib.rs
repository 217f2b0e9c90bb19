//! Minimal reverse-mode automatic differentiation over dense multi-dimensional
//! arrays, sized for volumetric convolutional networks.
//!
//! The engine is a define-by-run tape: operations append nodes to a [`Graph`],
//! [`Graph::backward`] walks the tape in reverse and accumulates gradients.
//! Tensors are dense row-major arrays of rank <= 5 with layout
//! `(batch, channels, x, y, z)`.
//!
//! Element type is generic over [`Scalar`] (`f32` or `f64`): gradient tests
//! run in double precision, training defaults to single precision.

pub mod adam;
pub mod checkpoint;
pub mod gemm;
pub mod graph;
pub mod ops;
pub mod params;
pub mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use graph::{Graph, NodeId};
pub use params::{ParamStore, RunningStats};
pub use tensor::{Scalar, Tensor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("backward called before forward produced node {0:?}")]
    BackwardBeforeForward(usize),
    #[error("backward target must be a scalar, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("duplicate parameter `{0}`")]
    DuplicateParam(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AdError>;
