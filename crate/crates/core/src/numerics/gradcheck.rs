//! Finite-difference checks for every primitive op.

use super::*;
use crate::Result;

const H: f64 = 1e-5;

fn random_params(seed: u64, shapes: &[(&str, &[usize])]) -> ParamSet {
    let mut rng = RngStream::new(seed, 0);
    let mut p = ParamSet::new();
    for (name, shape) in shapes {
        let t = rng.gaussian(shape).map(|v| 0.5 * v);
        p.insert(*name, t).unwrap();
    }
    p
}

/// Max relative error between the tape gradient and central differences.
fn check(params: &ParamSet, f: impl Fn(&mut Graph) -> Result<Var>) -> f64 {
    let eval = |p: &ParamSet| -> f64 {
        let mut g = Graph::new(p);
        let l = f(&mut g).unwrap();
        g.value(l).item().unwrap()
    };
    let mut analytic = params.clone();
    let grads = {
        let mut g = Graph::new(params);
        let l = f(&mut g).unwrap();
        g.backward(l).unwrap()
    };
    analytic.accumulate(&grads);

    let mut worst: f64 = 0.0;
    let names: Vec<String> = params.names().map(str::to_owned).collect();
    for name in &names {
        let n = params.get(name).unwrap().len();
        for i in 0..n {
            let mut plus = params.clone();
            plus.get_mut(name).unwrap().data_mut()[i] += H;
            let mut minus = params.clone();
            minus.get_mut(name).unwrap().data_mut()[i] -= H;
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * H);
            let a = analytic.grad(name).unwrap().data()[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    worst
}

#[test]
fn sum_gradient_is_all_ones() {
    let p = random_params(1, &[("w", &[3, 4])]);
    let grads = {
        let mut g = Graph::new(&p);
        let w = g.param("w").unwrap();
        let l = g.sum(w);
        g.backward(l).unwrap()
    };
    let mut q = p.clone();
    q.accumulate(&grads);
    assert!(q.grad("w").unwrap().data().iter().all(|&v| v == 1.0));
}

#[test]
fn half_squared_norm_gradient_is_the_weights() {
    let p = random_params(2, &[("w", &[5])]);
    let grads = {
        let mut g = Graph::new(&p);
        let w = g.param("w").unwrap();
        let sq = g.mul(w, w).unwrap();
        let s = g.sum(sq);
        let l = g.scale(s, 0.5);
        g.backward(l).unwrap()
    };
    let mut q = p.clone();
    q.accumulate(&grads);
    assert_eq!(q.grad("w").unwrap().data(), p.get("w").unwrap().data());
}

#[test]
fn repeated_backward_accumulates() {
    let mut p = random_params(3, &[("w", &[2])]);
    for _ in 0..3 {
        let grads = {
            let mut g = Graph::new(&p);
            let w = g.param("w").unwrap();
            let l = g.sum(w);
            g.backward(l).unwrap()
        };
        p.accumulate(&grads);
    }
    assert_eq!(p.grad("w").unwrap().data(), &[3.0, 3.0]);
}

#[test]
fn non_scalar_loss_and_nan_are_rejected() {
    let p = random_params(4, &[("w", &[2])]);
    let mut g = Graph::new(&p);
    let w = g.param("w").unwrap();
    assert!(matches!(g.backward(w), Err(crate::Error::Contract(_))));
    let nan = g.constant(Tensor::scalar(f64::NAN));
    assert!(matches!(g.backward(nan), Err(crate::Error::Numeric(_))));
}

#[test]
fn affine_tanh_sigmoid_product() {
    let p = random_params(5, &[("x", &[3, 4]), ("w", &[4, 5]), ("b", &[5]), ("u", &[3, 5])]);
    let err = check(&p, |g| {
        let x = g.param("x")?;
        let w = g.param("w")?;
        let b = g.param("b")?;
        let u = g.param("u")?;
        let a = g.matmul(x, w)?;
        let a = g.add_bias(a, b)?;
        let t = g.tanh(a);
        let s = g.sigmoid(u);
        let m = g.mul(t, s)?;
        let d = g.sub(m, u)?;
        Ok(g.row_norm_mean(d))
    });
    assert!(err < 1e-4, "{err}");
}

#[test]
fn leaky_relu_and_reshape() {
    let p = random_params(6, &[("x", &[2, 6]), ("w", &[3, 3])]);
    let err = check(&p, |g| {
        let x = g.param("x")?;
        let w = g.param("w")?;
        let r = g.reshape(x, &[4, 3])?;
        let a = g.matmul(r, w)?;
        let l = g.leaky_relu(a, 0.01);
        let back = g.reshape(l, &[2, 6])?;
        let sum = g.add(back, x)?;
        let sq = g.mul(sum, sum)?;
        Ok(g.sum(sq))
    });
    assert!(err < 1e-4, "{err}");
}

#[test]
fn lstm_cell() {
    let hidden = 3;
    let p = random_params(
        7,
        &[
            ("x", &[2, 5]),
            ("w_ih", &[1, 4 * hidden]),
            ("w_hh", &[hidden, 4 * hidden]),
            ("b", &[4 * hidden]),
        ],
    );
    let err = check(&p, |g| {
        let x = g.param("x")?;
        let wi = g.param("w_ih")?;
        let wh = g.param("w_hh")?;
        let b = g.param("b")?;
        let h = g.lstm(x, wi, wh, b)?;
        let sq = g.mul(h, h)?;
        let s = g.sum(sq);
        let hs = g.sum(h);
        g.add(s, hs)
    });
    assert!(err < 1e-4, "{err}");
}

#[test]
fn inference_lstm_matches_recorded() {
    let hidden = 4;
    let p = random_params(
        8,
        &[
            ("x", &[3, 7]),
            ("w_ih", &[1, 4 * hidden]),
            ("w_hh", &[hidden, 4 * hidden]),
            ("b", &[4 * hidden]),
        ],
    );
    let run = |mut g: Graph| {
        let x = g.param("x").unwrap();
        let wi = g.param("w_ih").unwrap();
        let wh = g.param("w_hh").unwrap();
        let b = g.param("b").unwrap();
        let h = g.lstm(x, wi, wh, b).unwrap();
        g.value(h).clone()
    };
    assert_eq!(run(Graph::new(&p)), run(Graph::inference(&p)));
}

#[test]
fn softmax_attention() {
    let p = random_params(9, &[("q", &[6, 4]), ("k", &[6, 4]), ("v", &[6, 4]), ("c", &[6, 4])]);
    let err = check(&p, |g| {
        let q = g.param("q")?;
        let k = g.param("k")?;
        let v = g.param("v")?;
        let c = g.param("c")?;
        let o = g.attention(q, k, v, 3, 2)?;
        let m = g.mul(o, c)?;
        Ok(g.sum(m))
    });
    assert!(err < 1e-4, "{err}");
}

#[test]
fn attention_rejects_indivisible_dims() {
    let p = random_params(10, &[("q", &[6, 4])]);
    let mut g = Graph::new(&p);
    let q = g.param("q").unwrap();
    assert!(g.attention(q, q, q, 4, 2).is_err());
    assert!(g.attention(q, q, q, 3, 3).is_err());
}
