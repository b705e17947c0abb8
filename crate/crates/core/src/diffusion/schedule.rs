use crate::numerics::RngStream;
use crate::{Error, Result};

/// Linear variance schedule with derived products. Index `n` runs from 1
/// to `N`; `alpha_bar(0)` is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alpha_bars: Vec<f64>,
    sigmas: Vec<f64>,
}

impl NoiseSchedule {
    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn beta(&self, n: usize) -> f64 {
        self.betas[n - 1]
    }

    pub fn alpha(&self, n: usize) -> f64 {
        1.0 - self.betas[n - 1]
    }

    pub fn alpha_bar(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.alpha_bars[n - 1]
        }
    }

    /// Reverse-step noise scale; zero at `n = 1`.
    pub fn sigma(&self, n: usize) -> f64 {
        self.sigmas[n - 1]
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars
    }
}

/// `beta_n` linear from `beta_1` to `beta_n_max` over `n_steps` steps.
pub fn build_schedule(beta_1: f64, beta_last: f64, n_steps: usize) -> Result<NoiseSchedule> {
    if n_steps < 2 {
        return Err(Error::input(format!("schedule needs at least 2 steps, got {n_steps}")));
    }
    if !(beta_1 > 0.0 && beta_1 <= beta_last && beta_last < 1.0) {
        return Err(Error::input(format!(
            "schedule bounds must satisfy 0 < beta_1 <= beta_N < 1, got {beta_1} and {beta_last}"
        )));
    }
    if 1.0 - beta_1 == 1.0 {
        return Err(Error::input(format!("beta_1 {beta_1} vanishes against 1 in double precision")));
    }
    let span = (beta_last - beta_1) / (n_steps - 1) as f64;
    let mut betas: Vec<f64> = (0..n_steps).map(|i| beta_1 + i as f64 * span).collect();
    betas[n_steps - 1] = beta_last;
    let mut alpha_bars = Vec::with_capacity(n_steps);
    let mut prod = 1.0;
    for &b in &betas {
        prod *= 1.0 - b;
        alpha_bars.push(prod);
    }
    let sigmas = (0..n_steps)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                (betas[i] * (1.0 - alpha_bars[i - 1]) / (1.0 - alpha_bars[i])).sqrt()
            }
        })
        .collect();
    Ok(NoiseSchedule {
        betas,
        alpha_bars,
        sigmas,
    })
}

/// `sqrt(ab) * x0 + sqrt(1 - ab) * eps`.
pub fn forward_diffuse(x0: &[f64], alpha_bar: f64, eps: &[f64]) -> Result<Vec<f64>> {
    if x0.len() != eps.len() {
        return Err(Error::contract(format!("x0 has {} values, noise {}", x0.len(), eps.len())));
    }
    if !(alpha_bar > 0.0 && alpha_bar <= 1.0) {
        return Err(Error::contract(format!("alpha_bar {alpha_bar} outside (0, 1]")));
    }
    let (a, b) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    Ok(x0.iter().zip(eps).map(|(x, e)| a * x + b * e).collect())
}

/// Continuous noise level drawn uniformly between `sqrt(alpha_bar(n))`
/// and `sqrt(alpha_bar(n - 1))`.
pub fn sample_noise_level(n: usize, schedule: &NoiseSchedule, rng: &mut RngStream) -> Result<f64> {
    if n < 2 || n > schedule.steps() {
        return Err(Error::input(format!("noise index {n} outside 2..={}", schedule.steps())));
    }
    let lo = schedule.alpha_bar(n).sqrt();
    let hi = schedule.alpha_bar(n - 1).sqrt();
    Ok(rng.uniform(lo, hi))
}
