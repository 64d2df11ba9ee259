//! Dense reverse-mode autodiff with the layer set the estimator network needs.

mod adam;
pub mod attention;
pub mod functional;
mod graph;
mod init;
pub mod kernels;
pub mod loss;
mod tensor;

pub use adam::AdamState;
pub use graph::{Gradients, Graph, Var};
pub use init::glorot_uniform;
pub use loss::LossSpec;
pub use tensor::Tensor;
