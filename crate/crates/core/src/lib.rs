//! Synthetic net-load generation with conditional denoising diffusion.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense tensors, a reverse-mode tape, Adam, seeded RNG
//!   streams and parameter checkpoints.
//! - [`solarphys`]: sun position, plane-of-array irradiance, cell
//!   temperature, AC power and per-azimuth basis profiles.
//! - [`data`]: weather and net-load ingestion, imputation, normalization,
//!   condition encoding, splitting and a synthetic dataset generator.
//! - [`denoiser`]: the baseline and physics-informed noise predictors.
//! - [`diffusion`]: noise schedule, forward process, training and the
//!   reverse sampler.
//! - [`metrics`]: ensemble scores and report tables.
//! - [`pipeline`]: helpers that chain the above into experiment runs.

pub mod data;
pub mod denoiser;
pub mod diffusion;
mod error;
pub mod metrics;
pub mod numerics;
pub mod pipeline;
pub mod solarphys;

pub use error::{Error, Result};

/// Time steps in a daily profile at 15-minute resolution.
pub const STEPS_PER_DAY: usize = 96;
