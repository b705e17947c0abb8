use crate::numerics::Tensor;
use crate::{Error, Result};

/// Quantile levels 0.1 through 0.9.
pub const QUANTILE_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// `M` sampled trajectories for one condition plus the observed trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    samples: Tensor,
    actual: Vec<f64>,
}

impl Ensemble {
    pub fn new(samples: Tensor, actual: Vec<f64>) -> Result<Self> {
        if samples.shape().len() != 2 || samples.rows() == 0 || samples.cols() != actual.len() {
            return Err(Error::input(format!(
                "ensemble of shape {:?} against an actual of length {}",
                samples.shape(),
                actual.len()
            )));
        }
        if !samples.is_finite() || actual.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("ensemble contains non-finite values"));
        }
        Ok(Self { samples, actual })
    }

    pub fn members(&self) -> usize {
        self.samples.rows()
    }

    pub fn steps(&self) -> usize {
        self.actual.len()
    }

    pub fn samples(&self) -> &Tensor {
        &self.samples
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    fn column(&self, t: usize) -> Vec<f64> {
        (0..self.members()).map(|i| self.samples.row(i)[t]).collect()
    }
}

/// Mean over members of the squared error at each time slot.
pub fn mse_per_time(e: &Ensemble) -> Vec<f64> {
    let m = e.members() as f64;
    let mut out = vec![0.0; e.steps()];
    for i in 0..e.members() {
        for (o, (x, a)) in out.iter_mut().zip(e.samples.row(i).iter().zip(&e.actual)) {
            *o += (x - a).powi(2);
        }
    }
    out.iter_mut().for_each(|o| *o /= m);
    out
}

/// Quantile of ascending `sorted` by linear interpolation between order
/// statistics at position `q * (M - 1)`.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn pinball(u: f64, q: f64) -> f64 {
    if u < 0.0 {
        u * (q - 1.0)
    } else {
        u * q
    }
}

/// Pinball loss of the per-slot empirical `q`-quantile, averaged over slots.
pub fn quantile_score(e: &Ensemble, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::input(format!("quantile level {q} outside (0, 1)")));
    }
    let mut total = 0.0;
    for t in 0..e.steps() {
        let mut col = e.column(t);
        col.sort_by(|a, b| a.total_cmp(b));
        total += pinball(e.actual[t] - empirical_quantile(&col, q), q);
    }
    Ok(total / e.steps() as f64)
}

/// Quantile score averaged over [`QUANTILE_LEVELS`].
pub fn mean_quantile_score(e: &Ensemble) -> f64 {
    let s: f64 = QUANTILE_LEVELS
        .iter()
        .map(|&q| quantile_score(e, q).expect("levels lie in (0, 1)"))
        .sum();
    s / QUANTILE_LEVELS.len() as f64
}

/// Ensemble CRPS per time slot. The pairwise term is computed from sorted
/// gaps: `sum_{i<j} |x_i - x_j| = sum_k k (M - k) (x_(k+1) - x_(k))`.
pub fn crps(e: &Ensemble) -> Vec<f64> {
    let m = e.members();
    let mf = m as f64;
    (0..e.steps())
        .map(|t| {
            let mut col = e.column(t);
            let skill: f64 = col.iter().map(|x| (x - e.actual[t]).abs()).sum::<f64>() / mf;
            col.sort_by(|a, b| a.total_cmp(b));
            let half_spread: f64 = col
                .windows(2)
                .enumerate()
                .map(|(k, w)| ((k + 1) * (m - k - 1)) as f64 * (w[1] - w[0]))
                .sum();
            (skill - half_spread / (mf * mf)).max(0.0)
        })
        .collect()
}

pub fn crps_mean(e: &Ensemble) -> f64 {
    let c = crps(e);
    c.iter().sum::<f64>() / c.len() as f64
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Energy score over whole trajectories; needs at least two members.
pub fn energy_score(e: &Ensemble) -> Result<f64> {
    let m = e.members();
    if m < 2 {
        return Err(Error::input(format!("energy score needs at least 2 members, got {m}")));
    }
    let mf = m as f64;
    let skill: f64 = (0..m).map(|i| dist(e.samples.row(i), &e.actual)).sum::<f64>() / mf;
    let mut spread = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            spread += 2.0 * dist(e.samples.row(i), e.samples.row(j));
        }
    }
    Ok(skill - spread / (2.0 * mf * mf))
}

/// Variogram score of order `gamma` with unit weights over slot pairs `t < t'`.
pub fn variogram_score(e: &Ensemble, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::input(format!("variogram order {gamma} must be positive")));
    }
    let (m, steps) = (e.members(), e.steps());
    let observed = |t: usize, u: usize| (e.actual[t] - e.actual[u]).abs().powf(gamma);
    let mut gap = vec![0.0; steps * steps];
    for i in 0..m {
        let row = e.samples.row(i);
        for t in 0..steps {
            for u in t + 1..steps {
                gap[t * steps + u] += observed(t, u) - (row[t] - row[u]).abs().powf(gamma);
            }
        }
    }
    let mut score = 0.0;
    for t in 0..steps {
        for u in t + 1..steps {
            score += (gap[t * steps + u] / m as f64).powi(2);
        }
    }
    Ok(score)
}

/// Mean absolute and root-mean-square error pooled over every member, slot
/// and ensemble.
pub fn mae_rmse(ensembles: &[Ensemble]) -> Result<(f64, f64)> {
    if ensembles.is_empty() {
        return Err(Error::input("no ensembles to score"));
    }
    let (mut abs, mut sq, mut n) = (0.0, 0.0, 0usize);
    for e in ensembles {
        for i in 0..e.members() {
            for (x, a) in e.samples.row(i).iter().zip(&e.actual) {
                abs += (x - a).abs();
                sq += (x - a).powi(2);
                n += 1;
            }
        }
    }
    Ok((abs / n as f64, (sq / n as f64).sqrt()))
}
