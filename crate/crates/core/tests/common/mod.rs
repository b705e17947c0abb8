#![allow(dead_code)]

use netload_core::numerics::{Graph, ParamSet, RngStream, Var};
use netload_core::Result;

/// Replaces every parameter with `scale * N(0, 1)` draws.
pub fn randomize(params: &mut ParamSet, seed: u64, scale: f64) {
    let mut rng = RngStream::new(seed, 99);
    let names: Vec<String> = params.names().map(str::to_owned).collect();
    for n in names {
        let t = params.get_mut(&n).unwrap();
        for v in t.data_mut() {
            *v = scale * rng.normal();
        }
    }
}

/// Largest relative error between tape gradients and central differences.
/// `stride` > 1 samples every `stride`-th coordinate of each parameter.
pub fn max_fd_error(params: &ParamSet, stride: usize, f: impl Fn(&mut Graph) -> Result<Var>) -> f64 {
    const H: f64 = 1e-5;
    let eval = |p: &ParamSet| {
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
        for i in (0..n).step_by(stride.max(1)) {
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
