mod common;

use netload_core::denoiser::{Denoiser, DenoiserConfig, Variant};
use netload_core::numerics::{Graph, RngStream, Tensor};
use netload_core::Error;
use proptest::prelude::*;

fn small(variant: Variant) -> DenoiserConfig {
    DenoiserConfig {
        variant,
        steps: 8,
        hidden: 16,
        cond_dim: 10,
        heads: 2,
        tokens: 2,
        leaky_slope: 0.01,
        k_scale: 5000.0,
        basis_rows: 2,
    }
}

struct Batch {
    x: Tensor,
    eps: Tensor,
    levels: Vec<f64>,
    y: Tensor,
    basis: Tensor,
}

fn batch(cfg: &DenoiserConfig, b: usize, seed: u64) -> Batch {
    let mut rng = RngStream::new(seed, 7);
    Batch {
        x: rng.gaussian(&[b, cfg.steps]),
        eps: rng.gaussian(&[b, cfg.steps]),
        levels: (0..b).map(|_| rng.uniform(0.05, 1.0)).collect(),
        y: rng.gaussian(&[b, cfg.cond_dim]),
        basis: rng.gaussian(&[b, cfg.basis_rows * cfg.steps]).map(f64::abs),
    }
}

fn loss(net: &Denoiser, g: &mut Graph, d: &Batch) -> netload_core::Result<netload_core::numerics::Var> {
    let x = g.constant(d.x.clone());
    let y = g.constant(d.y.clone());
    let basis = (net.variant() == Variant::PhysicsInformed).then(|| g.constant(d.basis.clone()));
    let eps_hat = net.forward(g, x, &d.levels, y, basis)?;
    let eps = g.constant(d.eps.clone());
    let diff = g.sub(eps, eps_hat)?;
    Ok(g.row_norm_mean(diff))
}

#[test]
fn end_to_end_gradients_match_finite_differences() {
    for variant in [Variant::Baseline, Variant::PhysicsInformed] {
        let cfg = small(variant);
        let mut net = Denoiser::new(cfg.clone(), 1).unwrap();
        common::randomize(net.params_mut(), 2, 0.3);
        let d = batch(&cfg, 3, 3);
        let err = common::max_fd_error(net.params(), 1, |g| loss(&net, g, &d));
        assert!(err < 1e-4, "{variant}: {err}");
    }
}

#[test]
fn zero_physics_weights_reproduce_the_baseline_exactly() {
    let bdm = Denoiser::new(small(Variant::Baseline), 11).unwrap();
    let mut pdm = Denoiser::new(small(Variant::PhysicsInformed), 11).unwrap();
    common::randomize(pdm.params_mut(), 5, 0.4);
    let mut bdm_params = bdm.params().clone();
    for (name, value) in pdm.params().iter() {
        if let Some(t) = bdm_params.get_mut(name) {
            *t = value.clone();
        }
    }
    let bdm = Denoiser::from_params(small(Variant::Baseline), bdm_params).unwrap();
    let names: Vec<String> = pdm.params().names().filter(|n| n.starts_with("pv_")).map(str::to_owned).collect();
    for n in names {
        pdm.params_mut().get_mut(&n).unwrap().fill(0.0);
    }
    let d = batch(&small(Variant::Baseline), 6, 4);
    let a = bdm.predict(&d.x, &d.levels, &d.y, None).unwrap();
    let b = pdm.predict(&d.x, &d.levels, &d.y, Some(&d.basis)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn both_variants_share_initial_shared_weights() {
    let bdm = Denoiser::new(small(Variant::Baseline), 21).unwrap();
    let pdm = Denoiser::new(small(Variant::PhysicsInformed), 21).unwrap();
    for (name, value) in bdm.params().iter() {
        assert_eq!(pdm.params().get(name), Some(value), "{name}");
    }
    assert!(pdm.params().len() > bdm.params().len());
}

#[test]
fn output_layer_starts_at_zero() {
    let net = Denoiser::new(small(Variant::PhysicsInformed), 2).unwrap();
    let d = batch(net.config(), 4, 1);
    let out = net.predict(&d.x, &d.levels, &d.y, Some(&d.basis)).unwrap();
    assert!(out.data().iter().all(|&v| v == 0.0));
}

#[test]
fn every_parameter_receives_gradient() {
    for variant in [Variant::Baseline, Variant::PhysicsInformed] {
        let mut net = Denoiser::new(small(variant), 8).unwrap();
        common::randomize(net.params_mut(), 9, 0.3);
        let d = batch(net.config(), 5, 10);
        let grads = {
            let mut g = Graph::new(net.params());
            let l = loss(&net, &mut g, &d).unwrap();
            g.backward(l).unwrap()
        };
        let mut p = net.params().clone();
        p.accumulate(&grads);
        for name in net.params().names() {
            let gr = p.grad(name).unwrap();
            assert!(gr.data().iter().any(|&v| v != 0.0), "{variant}: `{name}` has no gradient");
        }
    }
}

#[test]
fn variant_and_basis_must_agree() {
    let d = batch(&small(Variant::Baseline), 2, 1);
    let bdm = Denoiser::new(small(Variant::Baseline), 1).unwrap();
    let pdm = Denoiser::new(small(Variant::PhysicsInformed), 1).unwrap();
    assert!(matches!(pdm.predict(&d.x, &d.levels, &d.y, None), Err(Error::Input(_))));
    assert!(matches!(bdm.predict(&d.x, &d.levels, &d.y, Some(&d.basis)), Err(Error::Input(_))));
    assert!(pdm.predict(&d.x, &d.levels[..1], &d.y, Some(&d.basis)).is_err());
}

#[test]
fn from_params_checks_layout() {
    let bdm = Denoiser::new(small(Variant::Baseline), 1).unwrap();
    assert!(Denoiser::from_params(small(Variant::PhysicsInformed), bdm.params().clone()).is_err());
    let mut wider = small(Variant::Baseline);
    wider.hidden = 32;
    assert!(Denoiser::from_params(wider, bdm.params().clone()).is_err());
}

#[test]
fn predictions_are_bit_reproducible() {
    let mut net = Denoiser::new(small(Variant::PhysicsInformed), 3).unwrap();
    common::randomize(net.params_mut(), 3, 0.3);
    let d = batch(net.config(), 4, 2);
    let a = net.predict(&d.x, &d.levels, &d.y, Some(&d.basis)).unwrap();
    let b = net.predict(&d.x, &d.levels, &d.y, Some(&d.basis)).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn submodule_shapes_hold_for_any_batch(b in 1usize..7, seed in 0u64..100) {
        let cfg = small(Variant::PhysicsInformed);
        let net = Denoiser::new(cfg.clone(), seed).unwrap();
        let d = batch(&cfg, b, seed);
        let mut g = Graph::new(net.params());
        let x = g.constant(d.x.clone());
        let y = g.constant(d.y.clone());
        let basis = g.constant(d.basis.clone().reshape(&[b, cfg.basis_rows, cfg.steps]).unwrap());
        let h = net.lstm_embed(&mut g, x).unwrap();
        prop_assert_eq!(g.value(h).shape(), &[b, cfg.hidden]);
        let a = net.self_attention(&mut g, h).unwrap();
        prop_assert_eq!(g.value(a).shape(), &[b, cfg.hidden]);
        let c = net.cond_embed(&mut g, y).unwrap();
        prop_assert_eq!(g.value(c).shape(), &[b, cfg.hidden]);
        let p = net.pv_embedding(&mut g, y, basis).unwrap();
        prop_assert_eq!(g.value(p).shape(), &[b, cfg.hidden]);
        let out = net.forward(&mut g, x, &d.levels, y, Some(basis)).unwrap();
        prop_assert_eq!(g.value(out).shape(), &[b, cfg.steps]);
    }
}

#[test]
fn checkpoints_round_trip_and_check_headers() {
    let dir = std::env::temp_dir().join(format!("netload-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pdm.ckpt");
    let mut net = Denoiser::new(small(Variant::PhysicsInformed), 4).unwrap();
    common::randomize(net.params_mut(), 1, 0.2);
    net.save(&path).unwrap();
    let back = Denoiser::load(small(Variant::PhysicsInformed), &path).unwrap();
    assert_eq!(back.params(), net.params());
    assert!(matches!(Denoiser::load(small(Variant::Baseline), &path), Err(Error::Config(_))));
    let wider = DenoiserConfig { hidden: 32, ..small(Variant::PhysicsInformed) };
    assert!(Denoiser::load(wider, &path).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}
