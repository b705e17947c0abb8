use std::fmt;
use std::str::FromStr;

use crate::data::COND_DIM;
use crate::{Error, Result, STEPS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Conditions only.
    Baseline,
    /// Conditions plus embedded PV basis profiles.
    PhysicsInformed,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Baseline => "bdm",
            Variant::PhysicsInformed => "pdm",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bdm" | "baseline" => Ok(Variant::Baseline),
            "pdm" | "physics" | "physics-informed" => Ok(Variant::PhysicsInformed),
            other => Err(Error::Config(format!("unknown variant `{other}` (expected bdm or pdm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserConfig {
    pub variant: Variant,
    /// Profile length T.
    pub steps: usize,
    /// Hidden width H.
    pub hidden: usize,
    /// Condition width C.
    pub cond_dim: usize,
    pub heads: usize,
    /// Number of tokens the hidden vector is split into for attention.
    pub tokens: usize,
    pub leaky_slope: f64,
    /// Scale applied to the noise level before the sinusoidal embedding.
    pub k_scale: f64,
    /// Number of basis profiles L.
    pub basis_rows: usize,
}

impl DenoiserConfig {
    /// Full-size network: H = 1000 split into 10 tokens.
    pub fn full(variant: Variant) -> Self {
        Self {
            variant,
            steps: STEPS_PER_DAY,
            hidden: 1000,
            cond_dim: COND_DIM,
            heads: 4,
            tokens: 10,
            leaky_slope: 0.01,
            k_scale: 5000.0,
            basis_rows: 7,
        }
    }

    /// Small network for CPU experiments: H = 64 split into 4 tokens.
    pub fn desk(variant: Variant) -> Self {
        Self {
            hidden: 64,
            tokens: 4,
            ..Self::full(variant)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.steps == 0 || self.cond_dim == 0 || self.basis_rows == 0 {
            return bad("steps, cond_dim and basis_rows must be positive".into());
        }
        if self.hidden == 0 || self.hidden % 2 != 0 {
            return bad(format!("hidden width {} must be even and positive", self.hidden));
        }
        if self.tokens == 0 || self.hidden % self.tokens != 0 {
            return bad(format!("hidden width {} is not divisible into {} tokens", self.hidden, self.tokens));
        }
        let width = self.hidden / self.tokens;
        if self.heads == 0 || width % self.heads != 0 {
            return bad(format!("token width {width} is not divisible by {} heads", self.heads));
        }
        if !self.leaky_slope.is_finite() || !(self.k_scale > 0.0) {
            return bad("leaky_slope must be finite and k_scale positive".into());
        }
        Ok(())
    }

    pub fn token_width(&self) -> usize {
        self.hidden / self.tokens
    }
}
