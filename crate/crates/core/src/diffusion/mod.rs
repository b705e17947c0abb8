//! Noise schedule, forward process, training loop and reverse sampler.

mod ema;
mod sampler;
mod schedule;
mod trainer;

pub use ema::Ema;
pub use sampler::{sample, ClipMode, ConditionedDenoiser, NoisePredictor, SamplerConfig};
pub use schedule::{build_schedule, forward_diffuse, sample_noise_level, NoiseSchedule};
pub use trainer::{write_loss_log, LossRecord, TrainConfig, Trainer};
