use std::ops::Range;

use super::NoiseSchedule;
use crate::data::gather;
use crate::denoiser::Denoiser;
use crate::numerics::{RngStream, Tensor};
use crate::{Error, Result};

/// Noise prediction for a block of trajectories at one noise level.
pub trait NoisePredictor {
    /// Profile length.
    fn steps(&self) -> usize;

    /// `x` holds the current iterates of trajectories `rows`, one per row.
    fn predict_noise(&self, x: &Tensor, level: f64, rows: Range<usize>) -> Result<Tensor>;
}

/// A network paired with one condition (and basis) row per trajectory.
pub struct ConditionedDenoiser<'a> {
    pub net: &'a Denoiser,
    pub cond: &'a Tensor,
    pub basis: Option<&'a Tensor>,
}

impl NoisePredictor for ConditionedDenoiser<'_> {
    fn steps(&self) -> usize {
        self.net.config().steps
    }

    fn predict_noise(&self, x: &Tensor, level: f64, rows: Range<usize>) -> Result<Tensor> {
        let idx: Vec<usize> = rows.collect();
        let y = gather(self.cond, &idx);
        let basis = self.basis.map(|b| gather(b, &idx));
        self.net.predict(x, &vec![level; idx.len()], &y, basis.as_ref())
    }
}

/// Where each reverse step is clipped to [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClipMode {
    /// After the noise term is added.
    #[default]
    AfterNoise,
    /// On the mean, before the noise term.
    BeforeNoise,
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub clip: ClipMode,
    /// Trajectories evaluated together.
    pub chunk_size: usize,
    pub seed: u64,
    /// Trajectory `i` draws from stream `first_stream + i`.
    pub first_stream: u64,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            clip: ClipMode::default(),
            chunk_size: 256,
            seed,
            first_stream: 0,
        }
    }
}

/// Runs `count` reverse chains from pure noise and returns them as rows.
pub fn sample(
    predictor: &impl NoisePredictor,
    count: usize,
    schedule: &NoiseSchedule,
    cfg: &SamplerConfig,
) -> Result<Tensor> {
    if cfg.chunk_size == 0 {
        return Err(Error::Config("sampler chunk size must be positive".into()));
    }
    let steps = predictor.steps();
    let mut out = Vec::with_capacity(count * steps);
    let mut start = 0;
    while start < count {
        let end = (start + cfg.chunk_size).min(count);
        let mut rngs: Vec<RngStream> = (start..end)
            .map(|i| RngStream::new(cfg.seed, cfg.first_stream + i as u64))
            .collect();
        let mut x: Vec<f64> = rngs
            .iter_mut()
            .flat_map(|r| (0..steps).map(|_| r.normal()).collect::<Vec<_>>())
            .collect();
        for n in (1..=schedule.steps()).rev() {
            let (alpha, ab, sigma) = (schedule.alpha(n), schedule.alpha_bar(n), schedule.sigma(n));
            let xt = Tensor::new(vec![end - start, steps], x)?;
            let eps = predictor.predict_noise(&xt, ab.sqrt(), start..end)?;
            if eps.shape() != xt.shape() {
                return Err(Error::contract(format!(
                    "predictor returned {:?} for {:?}",
                    eps.shape(),
                    xt.shape()
                )));
            }
            let coef = (1.0 - alpha) / (1.0 - ab).sqrt();
            let inv = 1.0 / alpha.sqrt();
            x = xt.into_data();
            for (r, rng) in rngs.iter_mut().enumerate() {
                let row = &mut x[r * steps..(r + 1) * steps];
                let e = eps.row(r);
                for (v, &ev) in row.iter_mut().zip(e) {
                    let mut m = (*v - coef * ev) * inv;
                    if cfg.clip == ClipMode::BeforeNoise {
                        m = m.clamp(-1.0, 1.0);
                    }
                    if n > 1 {
                        m += sigma * rng.normal();
                    }
                    if cfg.clip == ClipMode::AfterNoise {
                        m = m.clamp(-1.0, 1.0);
                    }
                    *v = m;
                }
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite iterate at reverse step {n}")));
            }
        }
        out.extend(x);
        start = end;
    }
    Tensor::new(vec![count, steps], out)
}
