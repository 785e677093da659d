//! A small reverse-mode autodiff library with exactly the pieces the asking
//! policy needs: dense and 3×3 convolution layers, a categorical head, Adam,
//! and a binary checkpoint format.

pub mod adam;
pub mod asknet;
pub mod categorical;
pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod kernels;
pub mod tensor;

pub use adam::{Adam, AdamConfig};
pub use asknet::{AskNet, ForwardVars, NetConfig};
pub use categorical::Categorical;
pub use checkpoint::CheckpointHeader;
pub use error::{NeuralError, Result};
pub use graph::{Graph, Var};
pub use tensor::Tensor;
