use crate::numerics::ParamSet;
use crate::{Error, Result};

/// Exponential moving average of a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Ema {
    shadow: ParamSet,
    mu: f64,
}

impl Ema {
    /// Starts the shadow at a copy of `live`.
    pub fn new(live: &ParamSet, mu: f64) -> Result<Self> {
        Self::with_shadow(live.clone(), mu)
    }

    pub fn with_shadow(mut shadow: ParamSet, mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::Config(format!("EMA factor {mu} outside [0, 1)")));
        }
        shadow.zero_grad();
        Ok(Self { shadow, mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn shadow(&self) -> &ParamSet {
        &self.shadow
    }

    pub fn into_shadow(self) -> ParamSet {
        self.shadow
    }

    /// `shadow <- mu * shadow + (1 - mu) * live`.
    pub fn update(&mut self, live: &ParamSet) -> Result<()> {
        if !self.shadow.same_layout(live) {
            return Err(Error::contract("EMA shadow and live parameters differ in layout"));
        }
        for i in 0..live.len() {
            let src = live.value_at(i).data();
            let dst = self.shadow.value_at_mut(i).data_mut();
            for (s, &w) in dst.iter_mut().zip(src) {
                *s = self.mu * *s + (1.0 - self.mu) * w;
            }
        }
        Ok(())
    }
}
