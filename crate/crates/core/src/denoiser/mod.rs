//! Conditional noise-prediction networks, with and without the PV branch.

mod config;
mod network;

pub use config::{DenoiserConfig, Variant};
pub use network::{positional_embedding, Denoiser, PHYSICS_PREFIX};
