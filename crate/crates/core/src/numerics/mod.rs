//! Differentiable computation core.

pub mod checkpoint;
mod graph;
mod optim;
mod params;
mod rng;
mod tensor;

#[cfg(test)]
mod gradcheck;

pub use graph::{Gradients, Graph, Var};
pub use optim::Adam;
pub use params::ParamSet;
pub use rng::RngStream;
pub use tensor::Tensor;

#[cfg(test)]
pub(crate) use graph::sigmoid;
