//! Glue for end-to-end runs: train a variant, sample per condition, score.

use crate::data::{
    denormalize, generate_synthetic_dataset, gather, prepare_dataset, split_dataset, CapacityScaling, DatasetSplit,
    PreparedDataset, SyntheticDatasetConfig,
};
use crate::denoiser::{Denoiser, DenoiserConfig, Variant};
use crate::diffusion::{sample, ConditionedDenoiser, NoiseSchedule, SamplerConfig, TrainConfig, Trainer};
use crate::metrics::Ensemble;
use crate::numerics::Tensor;
use crate::solarphys::DEFAULT_AZIMUTHS;
use crate::Result;

/// Synthetic dataset, prepared tensors and the train/test split.
pub fn synthetic_experiment(
    cfg: &SyntheticDatasetConfig,
    split_ratio: f64,
    split_seed: u64,
) -> Result<(PreparedDataset, DatasetSplit)> {
    let ds = generate_synthetic_dataset(cfg)?;
    let prep = prepare_dataset(
        ds.profiles,
        ds.pv,
        &ds.weather,
        &cfg.pv_template,
        &DEFAULT_AZIMUTHS,
        CapacityScaling::Raw,
    )?;
    let split = split_dataset(&prep.profiles, split_ratio, split_seed)?;
    Ok((prep, split))
}

/// Builds a fresh network for `variant` and trains it on `train_idx`.
pub fn train_variant(
    data: &PreparedDataset,
    train_idx: &[usize],
    denoiser: &DenoiserConfig,
    train: &TrainConfig,
    model_seed: u64,
) -> Result<Trainer> {
    let cfg = DenoiserConfig {
        basis_rows: data.basis_rows(),
        ..denoiser.clone()
    };
    let net = Denoiser::new(cfg, model_seed)?;
    let mut trainer = Trainer::new(net, train.clone())?;
    trainer.fit(data, train_idx)?;
    Ok(trainer)
}

/// Draws `members` normalized trajectories for each profile in `idx`.
/// Rows are grouped by condition: rows `k*members..(k+1)*members` belong
/// to `idx[k]`.
pub fn sample_for_profiles(
    net: &Denoiser,
    schedule: &NoiseSchedule,
    data: &PreparedDataset,
    idx: &[usize],
    members: usize,
    sampler: &SamplerConfig,
) -> Result<Tensor> {
    let repeated: Vec<usize> = idx.iter().flat_map(|&i| std::iter::repeat_n(i, members)).collect();
    let cond = gather(&data.cond, &repeated);
    let basis = (net.variant() == Variant::PhysicsInformed).then(|| gather(&data.basis, &repeated));
    let predictor = ConditionedDenoiser {
        net,
        cond: &cond,
        basis: basis.as_ref(),
    };
    sample(&predictor, repeated.len(), schedule, sampler)
}

/// Denormalizes grouped samples and pairs them with observed profiles.
pub fn ensembles_from_samples(data: &PreparedDataset, idx: &[usize], samples: &Tensor) -> Result<Vec<Ensemble>> {
    let members = samples.rows() / idx.len().max(1);
    idx.iter()
        .enumerate()
        .map(|(k, &i)| {
            let p = &data.profiles[i];
            let b = data.bounds[&p.customer_id];
            let rows: Vec<Vec<f64>> = (0..members).map(|j| denormalize(samples.row(k * members + j), b)).collect();
            Ensemble::new(Tensor::from_rows(&rows)?, p.values.clone())
        })
        .collect()
}
