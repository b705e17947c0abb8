use super::{ParamSet, Tensor};
use crate::{Error, Result};

/// Adam with a step-wise decaying learning rate.
#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    base_lr: f64,
    decay_factor: f64,
    decay_interval: u64,
    step: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Adam {
    /// `decay_factor` multiplies the learning rate after every
    /// `decay_interval` completed steps.
    pub fn new(params: &ParamSet, lr: f64, decay_factor: f64, decay_interval: u64) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
        }
        if !(decay_factor > 0.0 && decay_factor <= 1.0) || decay_interval == 0 {
            return Err(Error::Config(format!(
                "decay factor {decay_factor} every {decay_interval} steps"
            )));
        }
        let zeros = || params.iter().map(|(_, t)| Tensor::zeros(t.shape())).collect();
        Ok(Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            base_lr: lr,
            decay_factor,
            decay_interval,
            step: 0,
            m: zeros(),
            v: zeros(),
        })
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Learning rate the next step will use.
    pub fn learning_rate(&self) -> f64 {
        let decays = (self.step / self.decay_interval) as i32;
        self.base_lr * self.decay_factor.powi(decays)
    }

    /// Applies one update from the accumulated gradients, then zeroes them.
    pub fn step(&mut self, params: &mut ParamSet) -> Result<()> {
        if !params.has_grads() {
            return Err(Error::contract("optimizer step before any backward pass"));
        }
        if params.len() != self.m.len() {
            return Err(Error::contract("parameter set changed since optimizer creation"));
        }
        let lr = self.learning_rate();
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = params.grad_at(i).data().to_vec();
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            let w = params.value_at_mut(i).data_mut();
            for j in 0..g.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                w[j] -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        params.zero_grad();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Graph;

    fn single(values: &[f64]) -> ParamSet {
        let mut p = ParamSet::new();
        p.insert("w", Tensor::new(vec![values.len()], values.to_vec()).unwrap())
            .unwrap();
        p
    }

    fn backprop_sum(p: &mut ParamSet, scale: f64) {
        let grads = {
            let mut g = Graph::new(p);
            let w = g.param("w").unwrap();
            let s = g.scale(w, scale);
            let l = g.sum(s);
            g.backward(l).unwrap()
        };
        p.accumulate(&grads);
    }

    #[test]
    fn step_without_backward_is_a_contract_violation() {
        let mut p = single(&[1.0]);
        let mut opt = Adam::new(&p, 1e-3, 0.9, 1000).unwrap();
        assert!(matches!(opt.step(&mut p), Err(Error::Contract(_))));
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut p = single(&[1.5, -2.0]);
        let before = p.clone();
        let mut opt = Adam::new(&p, 1e-3, 0.9, 1000).unwrap();
        backprop_sum(&mut p, 0.0);
        opt.step(&mut p).unwrap();
        assert_eq!(p.get("w"), before.get("w"));
        assert_eq!(opt.steps_taken(), 1);
    }

    #[test]
    fn constant_gradient_moves_by_learning_rate_against_its_sign() {
        let mut p = single(&[0.0, 0.0]);
        let lr = 1e-3;
        let mut opt = Adam::new(&p, lr, 1.0, 1000).unwrap();
        let mut last = p.get("w").unwrap().data().to_vec();
        for _ in 0..200 {
            backprop_sum(&mut p, 3.0);
            opt.step(&mut p).unwrap();
            let now = p.get("w").unwrap().data().to_vec();
            for (a, b) in now.iter().zip(&last) {
                let delta = a - b;
                assert!(delta < 0.0);
                assert!((delta.abs() - lr).abs() < 1e-6 * lr + 1e-9);
            }
            last = now;
        }
    }

    #[test]
    fn learning_rate_decays_every_interval() {
        let mut p = single(&[0.0]);
        let mut opt = Adam::new(&p, 5e-4, 0.9, 1000).unwrap();
        for i in 0..2000 {
            if i == 999 {
                assert_eq!(opt.learning_rate(), 5e-4);
            }
            backprop_sum(&mut p, 1.0);
            opt.step(&mut p).unwrap();
            if i == 999 {
                assert!((opt.learning_rate() - 4.5e-4).abs() < 1e-18);
            }
        }
        assert!((opt.learning_rate() - 5e-4 * 0.81).abs() < 1e-18);
    }

    #[test]
    fn gradients_are_zeroed_after_step() {
        let mut p = single(&[1.0]);
        let mut opt = Adam::new(&p, 1e-3, 0.9, 1000).unwrap();
        backprop_sum(&mut p, 2.0);
        opt.step(&mut p).unwrap();
        assert_eq!(p.grad("w").unwrap().data(), &[0.0]);
        assert!(!p.has_grads());
    }
}
