use std::io::Write;
use std::time::Instant;

use super::{build_schedule, forward_diffuse, sample_noise_level, Ema, NoiseSchedule};
use crate::data::{gather, PreparedDataset};
use crate::denoiser::{Denoiser, Variant};
use crate::numerics::{Adam, Graph, ParamSet, RngStream, Tensor};
use crate::{Error, Result};

const NOISE_STREAM: u64 = 2;
const BATCH_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub lr_decay_interval: usize,
    /// Optimizer steps.
    pub steps: usize,
    /// Clamped to the training-set size.
    pub batch_size: usize,
    pub ema_mu: f64,
    pub beta_1: f64,
    pub beta_last: f64,
    pub diffusion_steps: usize,
    /// Seeds noise draws and minibatch selection.
    pub seed: u64,
    /// Loss-log interval in steps.
    pub log_every: usize,
}

impl TrainConfig {
    /// Full-size run: 80000 full-batch steps on a 500-step schedule.
    pub fn full() -> Self {
        Self {
            learning_rate: 5e-4,
            lr_decay: 0.9,
            lr_decay_interval: 1000,
            steps: 80_000,
            batch_size: 5000,
            ema_mu: 0.9,
            beta_1: 1e-6,
            beta_last: 2e-2,
            diffusion_steps: 500,
            seed: 0,
            log_every: 100,
        }
    }

    /// CPU-sized run on a 50-step schedule. The endpoint variance is raised
    /// so the shorter chain still reaches near-pure noise.
    pub fn desk() -> Self {
        Self {
            learning_rate: 1e-3,
            steps: 3000,
            batch_size: 64,
            beta_last: 0.2,
            diffusion_steps: 50,
            log_every: 50,
            ..Self::full()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.learning_rate, self.lr_decay];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("learning rate and decay must be positive".into()));
        }
        if self.lr_decay_interval == 0 || self.batch_size == 0 || self.log_every == 0 {
            return Err(Error::Config("decay interval, batch size and log interval must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.ema_mu) {
            return Err(Error::Config(format!("EMA factor {} outside [0, 1)", self.ema_mu)));
        }
        build_schedule(self.beta_1, self.beta_last, self.diffusion_steps)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossRecord {
    pub step: usize,
    pub loss: f64,
    pub learning_rate: f64,
    pub wall_secs: f64,
}

pub fn write_loss_log<W: Write>(writer: W, log: &[LossRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["step", "loss", "learning_rate", "wall_secs"])?;
    for r in log {
        wtr.write_record([
            r.step.to_string(),
            r.loss.to_string(),
            r.learning_rate.to_string(),
            format!("{:.3}", r.wall_secs),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Optimizer, EMA and randomness for one training run.
pub struct Trainer {
    model: Denoiser,
    opt: Adam,
    ema: Ema,
    schedule: NoiseSchedule,
    config: TrainConfig,
    noise_rng: RngStream,
    batch_rng: RngStream,
    log: Vec<LossRecord>,
    started: Instant,
}

impl Trainer {
    pub fn new(model: Denoiser, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let schedule = build_schedule(config.beta_1, config.beta_last, config.diffusion_steps)?;
        let opt = Adam::new(model.params(), config.learning_rate, config.lr_decay, config.lr_decay_interval as u64)?;
        let ema = Ema::new(model.params(), config.ema_mu)?;
        Ok(Self {
            noise_rng: RngStream::new(config.seed, NOISE_STREAM),
            batch_rng: RngStream::new(config.seed, BATCH_STREAM),
            model,
            opt,
            ema,
            schedule,
            config,
            log: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn model(&self) -> &Denoiser {
        &self.model
    }

    pub fn ema(&self) -> &Ema {
        &self.ema
    }

    pub fn schedule(&self) -> &NoiseSchedule {
        &self.schedule
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn log(&self) -> &[LossRecord] {
        &self.log
    }

    pub fn steps_taken(&self) -> usize {
        self.opt.steps_taken() as usize
    }

    /// The EMA weights wrapped as a network.
    pub fn ema_model(&self) -> Result<Denoiser> {
        Denoiser::from_params(self.model.config().clone(), self.ema.shadow().clone())
    }

    pub fn into_parts(self) -> (Denoiser, ParamSet) {
        (self.model, self.ema.into_shadow())
    }

    /// One optimizer step on normalized profiles `x0` with conditions `y`.
    /// Returns the batch-mean residual norm before the update.
    pub fn training_step(&mut self, x0: &Tensor, y: &Tensor, basis: Option<&Tensor>) -> Result<f64> {
        let (batch, steps) = (x0.rows(), x0.cols());
        let mut noisy = Vec::with_capacity(batch * steps);
        let mut noise = Vec::with_capacity(batch * steps);
        let mut levels = Vec::with_capacity(batch);
        for r in 0..batch {
            let n = self.noise_rng.int_inclusive(2, self.schedule.steps());
            let level = sample_noise_level(n, &self.schedule, &mut self.noise_rng)?;
            let eps: Vec<f64> = (0..steps).map(|_| self.noise_rng.normal()).collect();
            noisy.extend(forward_diffuse(x0.row(r), level * level, &eps)?);
            noise.extend(eps);
            levels.push(level);
        }
        let grads;
        let loss;
        {
            let mut g = Graph::new(self.model.params());
            let xv = g.constant(Tensor::new(vec![batch, steps], noisy)?);
            let yv = g.constant(y.clone());
            let bv = basis.map(|b| g.constant(b.clone()));
            let eps_hat = self.model.forward(&mut g, xv, &levels, yv, bv)?;
            let eps = g.constant(Tensor::new(vec![batch, steps], noise)?);
            let diff = g.sub(eps, eps_hat)?;
            let l = g.row_norm_mean(diff);
            loss = g.value(l).data()[0];
            grads = g.backward(l)?;
        }
        let params = self.model.params_mut();
        params.accumulate(&grads);
        self.opt.step(params)?;
        self.ema.update(self.model.params())?;
        Ok(loss)
    }

    fn minibatch(&mut self, train_idx: &[usize]) -> Vec<usize> {
        if self.config.batch_size >= train_idx.len() {
            return train_idx.to_vec();
        }
        let mut idx = train_idx.to_vec();
        self.batch_rng.shuffle(&mut idx);
        idx.truncate(self.config.batch_size);
        idx
    }

    /// One step on a random minibatch of `train_idx`.
    pub fn step_on(&mut self, data: &PreparedDataset, train_idx: &[usize]) -> Result<f64> {
        if train_idx.is_empty() {
            return Err(Error::input("training set is empty"));
        }
        let idx = self.minibatch(train_idx);
        let x0 = gather(&data.x0, &idx);
        let y = gather(&data.cond, &idx);
        let basis = match self.model.variant() {
            Variant::PhysicsInformed => Some(gather(&data.basis, &idx)),
            Variant::Baseline => None,
        };
        self.training_step(&x0, &y, basis.as_ref())
    }

    /// Runs the configured number of steps, logging the loss every
    /// `log_every` steps and at the final step.
    pub fn fit(&mut self, data: &PreparedDataset, train_idx: &[usize]) -> Result<()> {
        self.fit_with(data, train_idx, |_| {})
    }

    pub fn fit_with(
        &mut self,
        data: &PreparedDataset,
        train_idx: &[usize],
        mut on_log: impl FnMut(&LossRecord),
    ) -> Result<()> {
        let remaining = self.config.steps.saturating_sub(self.steps_taken());
        for _ in 0..remaining {
            let lr = self.opt.learning_rate();
            let loss = self.step_on(data, train_idx)?;
            let step = self.steps_taken();
            if step % self.config.log_every == 0 || step == self.config.steps || step == 1 {
                let rec = LossRecord {
                    step,
                    loss,
                    learning_rate: lr,
                    wall_secs: self.started.elapsed().as_secs_f64(),
                };
                on_log(&rec);
                self.log.push(rec);
            }
        }
        Ok(())
    }
}
