//! Differentiable operations. Each op validates shapes, computes the forward
//! value, and registers a backward rule on the tape.

mod activation;
mod conv3d;
mod dense;
mod elementwise;
mod loss;
mod norm;
mod shape;

pub use activation::{dropout, elu, relu};
pub use conv3d::{conv3d, conv_output_dim, same_padding};
pub use dense::dense;
pub use elementwise::{add, mul, scale, sum};
pub use loss::softmax_xent;
pub use norm::{batch_norm, BnMode};
pub use shape::{concat, reshape};
