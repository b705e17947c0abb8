mod common;

use std::ops::Range;

use netload_core::denoiser::{Denoiser, DenoiserConfig, Variant};
use netload_core::diffusion::{
    build_schedule, forward_diffuse, sample, sample_noise_level, ClipMode, ConditionedDenoiser, Ema, NoisePredictor,
    SamplerConfig, TrainConfig, Trainer,
};
use netload_core::data::SyntheticDatasetConfig;
use netload_core::numerics::{ParamSet, RngStream, Tensor};
use netload_core::pipeline::synthetic_experiment;
use netload_core::{Error, Result};
use proptest::prelude::*;

/// `ln(prod(1 - beta))` via compensated summation of `ln_1p` terms.
fn oracle_alpha_bars(beta_1: f64, beta_n: f64, n: usize) -> Vec<f64> {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    (0..n)
        .map(|i| {
            let beta = beta_1 + (beta_n - beta_1) * i as f64 / (n - 1) as f64;
            let term = (-beta).ln_1p();
            let t = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
            sum = t;
            (sum + comp).exp()
        })
        .collect()
}

#[test]
fn schedule_endpoints_and_degenerate_limit() {
    let s = build_schedule(1e-4, 0.3, 2).unwrap();
    assert_eq!(s.betas(), &[1e-4, 0.3]);
    let s = build_schedule(1e-12, 1e-12, 500).unwrap();
    assert!((s.alpha_bar(500) - 1.0).abs() < 1e-9);
    assert!(build_schedule(0.0, 0.1, 10).is_err());
    assert!(build_schedule(0.2, 0.1, 10).is_err());
    assert!(build_schedule(0.01, 1.0, 10).is_err());
    assert!(matches!(build_schedule(0.01, 0.1, 1), Err(Error::Input(_))));
    assert!(build_schedule(1e-17, 1e-17, 10).is_err());
}

#[test]
fn schedule_matches_log_space_oracle() {
    let s = build_schedule(1e-6, 2e-2, 500).unwrap();
    let oracle = oracle_alpha_bars(1e-6, 2e-2, 500);
    for n in 1..=500 {
        let rel = (s.alpha_bar(n) - oracle[n - 1]).abs() / oracle[n - 1];
        assert!(rel < 1e-12, "n={n}: {rel}");
    }
}

#[test]
fn schedule_invariants() {
    let s = build_schedule(1e-6, 2e-2, 500).unwrap();
    assert_eq!(s.sigma(1), 0.0);
    for n in 2..=500 {
        assert!(s.beta(n) > s.beta(n - 1));
        assert!(s.alpha_bar(n) < s.alpha_bar(n - 1));
        assert_eq!(s.alpha_bar(n), s.alpha_bar(n - 1) * (1.0 - s.beta(n)));
        let var = s.beta(n) * (1.0 - s.alpha_bar(n - 1)) / (1.0 - s.alpha_bar(n));
        assert_eq!(s.sigma(n) * s.sigma(n), var.sqrt() * var.sqrt());
        assert!(s.sigma(n).powi(2) < s.beta(n));
    }
    assert!(s.alpha_bar(500) > 0.0 && s.alpha_bar(1) < 1.0);
}

#[test]
fn forward_diffusion_special_cases() {
    let x0 = [0.3, -0.7, 1.0];
    assert_eq!(forward_diffuse(&x0, 1.0, &[5.0, 5.0, 5.0]).unwrap(), x0.to_vec());
    assert_eq!(forward_diffuse(&x0, 0.25, &[0.0; 3]).unwrap(), vec![0.15, -0.35, 0.5]);
    assert!(forward_diffuse(&x0, 0.5, &[0.0; 2]).is_err());
}

#[test]
fn forward_diffusion_moments() {
    let x0 = [0.8, -0.4, 0.0, 1.0];
    let mut rng = RngStream::new(17, 0);
    let trials = 10_000;
    let mut sum = [0.0; 4];
    let mut sq = [0.0; 4];
    for _ in 0..trials {
        let eps: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
        let x = forward_diffuse(&x0, 0.5, &eps).unwrap();
        for i in 0..4 {
            sum[i] += x[i];
            sq[i] += x[i] * x[i];
        }
    }
    for i in 0..4 {
        let mean = sum[i] / trials as f64;
        let var = sq[i] / trials as f64 - mean * mean;
        assert!((mean - 0.5f64.sqrt() * x0[i]).abs() < 3.0 * (0.5f64 / trials as f64).sqrt());
        assert!((var - 0.5).abs() < 0.025, "{var}");
    }
}

#[test]
fn stepwise_chain_matches_closed_form_at_every_step() {
    let s = build_schedule(1e-6, 2e-2, 500).unwrap();
    let x0 = 0.6;
    let trials = 10_000;
    let mut rng = RngStream::new(23, 0);
    let mut sum = vec![0.0; 501];
    let mut sq = vec![0.0; 501];
    for _ in 0..trials {
        let mut x = x0;
        for n in 1..=500 {
            x = s.alpha(n).sqrt() * x + s.beta(n).sqrt() * rng.normal();
            sum[n] += x;
            sq[n] += x * x;
        }
    }
    for n in 1..=500 {
        let mean = sum[n] / trials as f64;
        let var = sq[n] / trials as f64 - mean * mean;
        let (cm, cv) = (s.alpha_bar(n).sqrt() * x0, 1.0 - s.alpha_bar(n));
        assert!((mean - cm).abs() < 4.0 * (cv / trials as f64).sqrt(), "n={n}");
        assert!((var - cv).abs() < 0.05 * cv, "n={n}: {var} vs {cv}");
    }
}

#[test]
fn noise_level_support_and_mean() {
    let s = build_schedule(1e-6, 2e-2, 500).unwrap();
    let mut rng = RngStream::new(1, 0);
    let (lo, hi) = (s.alpha_bar(250).sqrt(), s.alpha_bar(249).sqrt());
    let draws: Vec<f64> = (0..100_000).map(|_| sample_noise_level(250, &s, &mut rng).unwrap()).collect();
    assert!(draws.iter().all(|&d| d >= lo && d <= hi));
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!((mean - 0.5 * (lo + hi)).abs() < 0.01 * (hi - lo));
    assert!(sample_noise_level(1, &s, &mut rng).is_err());
    assert!(sample_noise_level(501, &s, &mut rng).is_err());

    let flat = build_schedule(1e-15, 1e-15, 3).unwrap();
    let (lo, hi) = (flat.alpha_bar(2).sqrt(), flat.alpha_bar(1).sqrt());
    let v = sample_noise_level(2, &flat, &mut rng).unwrap();
    assert!(v >= lo && v <= hi);
    assert!((v - lo).abs() < 1e-15);
}

fn scalar_params(v: f64) -> ParamSet {
    let mut p = ParamSet::new();
    p.insert("w", Tensor::new(vec![2], vec![v, -v]).unwrap()).unwrap();
    p
}

proptest! {
    #[test]
    fn ema_matches_geometric_closed_form(s0 in -5.0f64..5.0, w in -5.0f64..5.0, k in 0usize..=100, mu in 0.0f64..0.99) {
        let mut ema = Ema::new(&scalar_params(s0), mu).unwrap();
        let live = scalar_params(w);
        for _ in 0..k {
            ema.update(&live).unwrap();
        }
        let got = ema.shadow().get("w").unwrap().data()[0];
        let want = w + mu.powi(k as i32) * (s0 - w);
        prop_assert!((got - want).abs() < 1e-12, "{} vs {}", got, want);
    }
}

/// Predicts `scale * x` regardless of level.
struct Linear {
    steps: usize,
    scale: f64,
}

impl NoisePredictor for Linear {
    fn steps(&self) -> usize {
        self.steps
    }

    fn predict_noise(&self, x: &Tensor, _level: f64, _rows: Range<usize>) -> Result<Tensor> {
        Ok(x.map(|v| self.scale * v))
    }
}

#[test]
fn two_step_chain_matches_hand_computation() {
    let (b1, b2) = (0.1, 0.3);
    let s = build_schedule(b1, b2, 2).unwrap();
    let cfg = SamplerConfig::new(42);
    let out = sample(&Linear { steps: 3, scale: 0.5 }, 2, &s, &cfg).unwrap();

    let (a1, a2) = (1.0 - b1, 1.0 - b2);
    let (ab1, ab2) = (a1, a1 * a2);
    let sigma2 = (b2 * (1.0 - ab1) / (1.0 - ab2)).sqrt();
    for traj in 0..2 {
        let mut rng = RngStream::new(42, traj as u64);
        let x2: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
        let x1: Vec<f64> = x2
            .iter()
            .map(|&x| {
                let m = (x - (1.0 - a2) / (1.0 - ab2).sqrt() * 0.5 * x) / a2.sqrt();
                (m + sigma2 * rng.normal()).clamp(-1.0, 1.0)
            })
            .collect();
        for t in 0..3 {
            let x = x1[t];
            let want = ((x - (1.0 - a1) / (1.0 - ab1).sqrt() * 0.5 * x) / a1.sqrt()).clamp(-1.0, 1.0);
            assert!((out.row(traj)[t] - want).abs() < 1e-15);
        }
    }
}

#[test]
fn zero_prediction_with_vanishing_schedule_passes_noise_through() {
    let s = build_schedule(1e-15, 1e-15, 50).unwrap();
    let mut cfg = SamplerConfig::new(5);
    cfg.clip = ClipMode::Off;
    let out = sample(&Linear { steps: 96, scale: 0.0 }, 3, &s, &cfg).unwrap();
    for traj in 0..3 {
        let mut rng = RngStream::new(5, traj as u64);
        for t in 0..96 {
            assert!((out.row(traj)[t] - rng.normal()).abs() < 1e-6);
        }
    }
}

fn random_net(variant: Variant, seed: u64) -> Denoiser {
    let cfg = DenoiserConfig {
        steps: 96,
        hidden: 16,
        tokens: 2,
        heads: 2,
        ..DenoiserConfig::desk(variant)
    };
    let mut net = Denoiser::new(cfg, seed).unwrap();
    common::randomize(net.params_mut(), seed, 0.3);
    net
}

#[test]
fn samples_are_clipped_reproducible_and_chunk_invariant() {
    let net = random_net(Variant::PhysicsInformed, 3);
    let mut rng = RngStream::new(9, 0);
    let cond = rng.gaussian(&[7, 79]);
    let basis = rng.gaussian(&[7, 7 * 96]);
    let pred = ConditionedDenoiser { net: &net, cond: &cond, basis: Some(&basis) };
    let s = build_schedule(1e-4, 0.2, 20).unwrap();
    let mut cfg = SamplerConfig::new(11);
    let a = sample(&pred, 7, &s, &cfg).unwrap();
    assert_eq!(a.shape(), &[7, 96]);
    assert!(a.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    assert_eq!(a, sample(&pred, 7, &s, &cfg).unwrap());
    cfg.chunk_size = 3;
    assert_eq!(a, sample(&pred, 7, &s, &cfg).unwrap());
    cfg.seed = 12;
    assert_ne!(a, sample(&pred, 7, &s, &cfg).unwrap());
    cfg.clip = ClipMode::BeforeNoise;
    let b = sample(&pred, 7, &s, &cfg).unwrap();
    assert!(b.data().iter().all(|v| (-1.0..=1.0).contains(v)));
}

#[test]
fn trajectory_streams_are_uncorrelated() {
    let s = build_schedule(1e-12, 1e-12, 2).unwrap();
    let mut cfg = SamplerConfig::new(8);
    cfg.clip = ClipMode::Off;
    let out = sample(&Linear { steps: 5000, scale: 0.0 }, 2, &s, &cfg).unwrap();
    let (a, b) = (out.row(0), out.row(1));
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / 5000.0;
    assert!(dot.abs() < 0.06, "{dot}");
}

fn toy_batch(seed: u64, b: usize) -> (Tensor, Tensor, Tensor) {
    let mut rng = RngStream::new(seed, 4);
    let x0 = rng.gaussian(&[b, 96]).map(|v| (0.4 * v).tanh());
    let y = rng.gaussian(&[b, 79]);
    let basis = rng.gaussian(&[b, 7 * 96]).map(f64::abs);
    (x0, y, basis)
}

fn small_train() -> TrainConfig {
    TrainConfig {
        steps: 5,
        batch_size: 8,
        seed: 3,
        ..TrainConfig::desk()
    }
}

#[test]
fn identical_seeds_give_identical_loss_sequences() {
    let run = || {
        let net = random_net(Variant::Baseline, 1);
        let mut tr = Trainer::new(net, small_train()).unwrap();
        let (x0, y, _) = toy_batch(1, 8);
        (0..4).map(|_| tr.training_step(&x0, &y, None).unwrap()).collect::<Vec<_>>()
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.iter().all(|l| l.is_finite() && *l > 0.0));
}

#[test]
fn initial_loss_is_the_mean_gaussian_norm() {
    let net = Denoiser::new(DenoiserConfig { hidden: 16, tokens: 2, heads: 2, ..DenoiserConfig::desk(Variant::Baseline) }, 1).unwrap();
    let b = 64;
    let mut tr = Trainer::new(net, TrainConfig { batch_size: b, ..small_train() }).unwrap();
    let (x0, y, _) = toy_batch(2, b);
    let loss = tr.training_step(&x0, &y, None).unwrap();

    let mut rng = RngStream::new(77, 0);
    let norms: Vec<f64> = (0..100_000)
        .map(|_| (0..96).map(|_| rng.normal().powi(2)).sum::<f64>().sqrt())
        .collect();
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let sd = (norms.iter().map(|n| (n - mean).powi(2)).sum::<f64>() / norms.len() as f64).sqrt();
    assert!((loss - mean).abs() < 3.0 * sd / (b as f64).sqrt(), "{loss} vs {mean}");
}

#[test]
fn zero_physics_branch_gives_identical_first_step_loss() {
    let bdm = Denoiser::new(DenoiserConfig::desk(Variant::Baseline), 4).unwrap();
    let mut pdm = Denoiser::new(DenoiserConfig::desk(Variant::PhysicsInformed), 4).unwrap();
    pdm.zero_physics_branch();
    let (x0, y, basis) = toy_batch(3, 16);
    let mut tb = Trainer::new(bdm, small_train()).unwrap();
    let mut tp = Trainer::new(pdm, small_train()).unwrap();
    let lb = tb.training_step(&x0, &y, None).unwrap();
    let lp = tp.training_step(&x0, &y, Some(&basis)).unwrap();
    assert_eq!(lb.to_bits(), lp.to_bits());
    for (name, v) in tb.model().params().iter() {
        assert_eq!(tp.model().params().get(name), Some(v), "{name}");
    }
}

#[test]
fn ema_tracks_live_weights_during_training() {
    let net = random_net(Variant::Baseline, 6);
    let start = net.params().clone();
    let mut tr = Trainer::new(net, small_train()).unwrap();
    let (x0, y, _) = toy_batch(4, 8);
    tr.training_step(&x0, &y, None).unwrap();
    let live = tr.model().params();
    for (name, s) in tr.ema().shadow().iter() {
        let (l, s0) = (live.get(name).unwrap(), start.get(name).unwrap());
        for i in 0..s.len() {
            let want = 0.9 * s0.data()[i] + 0.1 * l.data()[i];
            assert!((s.data()[i] - want).abs() < 1e-15);
        }
    }
}

#[test]
fn train_config_validation() {
    assert!(TrainConfig::full().validate().is_ok());
    assert!(TrainConfig { batch_size: 0, ..TrainConfig::desk() }.validate().is_err());
    assert!(TrainConfig { ema_mu: 1.0, ..TrainConfig::desk() }.validate().is_err());
    assert!(TrainConfig { beta_last: 2.0, ..TrainConfig::desk() }.validate().is_err());
}

#[test]
fn training_reduces_the_loss_on_synthetic_profiles() {
    let data_cfg = SyntheticDatasetConfig::desk_scale(2, 40, 1);
    let (data, split) = synthetic_experiment(&data_cfg, 0.6, 1).unwrap();
    let cfg = DenoiserConfig { hidden: 16, tokens: 2, heads: 2, ..DenoiserConfig::desk(Variant::Baseline) };
    let net = Denoiser::new(cfg, 5).unwrap();
    let mut tr = Trainer::new(net, TrainConfig { batch_size: 32, learning_rate: 3e-3, ..small_train() }).unwrap();
    let losses: Vec<f64> = (0..600).map(|_| tr.step_on(&data, &split.train).unwrap()).collect();
    let early = losses[..50].iter().sum::<f64>() / 50.0;
    let late = losses[550..].iter().sum::<f64>() / 50.0;
    assert!(late < early, "{early} -> {late}");
}
