use std::path::Path;

use super::{DenoiserConfig, Variant};
use crate::numerics::checkpoint::{self, CheckpointHeader, FORMAT_VERSION};
use crate::numerics::{Graph, ParamSet, RngStream, Tensor, Var};
use crate::{Error, Result};

/// Parameters of the PV branch carry this name prefix.
pub const PHYSICS_PREFIX: &str = "pv_";

/// Sinusoidal embedding of a noise level: channel `2i` holds
/// `sin(k * level * f_i)` and channel `2i + 1` the cosine, with `f_i`
/// geometric from 1 down to 1e-4 across the `hidden / 2` pairs.
pub fn positional_embedding(level: f64, hidden: usize, k_scale: f64) -> Vec<f64> {
    let half = hidden / 2;
    let pos = k_scale * level;
    let mut out = vec![0.0; hidden];
    for i in 0..half {
        let freq = if half > 1 { 1e-4f64.powf(i as f64 / (half - 1) as f64) } else { 1.0 };
        out[2 * i] = (pos * freq).sin();
        out[2 * i + 1] = (pos * freq).cos();
    }
    out
}

enum Init {
    Uniform(f64),
    Zero,
}

fn layout(cfg: &DenoiserConfig) -> Vec<(String, Vec<usize>, Init)> {
    let (h, t, c, d) = (cfg.hidden, cfg.steps, cfg.cond_dim, cfg.token_width());
    let mut out = Vec::new();
    let linear = |out: &mut Vec<_>, name: &str, fan_in: usize, fan_out: usize| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        out.push((format!("{name}.w"), vec![fan_in, fan_out], Init::Uniform(bound)));
        out.push((format!("{name}.b"), vec![fan_out], Init::Uniform(bound)));
    };
    // Fan-in of the input weights is the scalar input.
    let lstm_bound = 1.0 / (h as f64).sqrt();
    out.push(("lstm.w_ih".into(), vec![1, 4 * h], Init::Uniform(1.0)));
    out.push(("lstm.w_hh".into(), vec![h, 4 * h], Init::Uniform(lstm_bound)));
    out.push(("lstm.b".into(), vec![4 * h], Init::Uniform(lstm_bound)));
    for name in ["attn.q", "attn.k", "attn.v", "attn.o"] {
        linear(&mut out, name, d, d);
    }
    linear(&mut out, "mlp.0", h, h);
    linear(&mut out, "mlp.1", h, h);
    linear(&mut out, "cond.0", c, h);
    linear(&mut out, "cond.1", h, h);
    out.push(("out.w".into(), vec![h, t], Init::Zero));
    out.push(("out.b".into(), vec![t], Init::Zero));
    if cfg.variant == Variant::PhysicsInformed {
        linear(&mut out, "pv_basis.0", cfg.basis_rows * t, h);
        linear(&mut out, "pv_basis.1", h, h);
        linear(&mut out, "pv_basis.2", h, h);
        linear(&mut out, "pv_cond.0", c, h);
        linear(&mut out, "pv_cond.1", h, h);
    }
    out
}

/// Noise-prediction network. Shared layers draw their initial values from
/// stream 0 of the seed and PV-branch layers from stream 1, so both
/// variants built from one seed start with identical shared weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Denoiser {
    config: DenoiserConfig,
    params: ParamSet,
}

impl Denoiser {
    pub fn new(config: DenoiserConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut shared = RngStream::new(seed, 0);
        let mut physics = RngStream::new(seed, 1);
        let mut params = ParamSet::new();
        for (name, shape, init) in layout(&config) {
            let rng = if name.starts_with(PHYSICS_PREFIX) { &mut physics } else { &mut shared };
            let n: usize = shape.iter().product();
            let data = match init {
                Init::Zero => vec![0.0; n],
                Init::Uniform(b) => (0..n).map(|_| rng.uniform(-b, b)).collect(),
            };
            params.insert(name, Tensor::new(shape, data)?)?;
        }
        Ok(Self { config, params })
    }

    /// Wraps existing parameters after checking names and shapes.
    pub fn from_params(config: DenoiserConfig, params: ParamSet) -> Result<Self> {
        config.validate()?;
        let expected = layout(&config);
        let matches = expected.len() == params.len()
            && expected
                .iter()
                .zip(params.iter())
                .all(|((n, s, _), (pn, pt))| n == pn && s.as_slice() == pt.shape());
        if !matches {
            return Err(Error::contract(format!(
                "parameter layout does not match a {} network with H={} T={} C={} L={}",
                config.variant, config.hidden, config.steps, config.cond_dim, config.basis_rows
            )));
        }
        Ok(Self { config, params })
    }

    /// Writes `params` (live or EMA) under this network's header.
    pub fn save_params(&self, path: &Path, params: &ParamSet) -> Result<()> {
        if !params.same_layout(&self.params) {
            return Err(Error::contract("parameters do not match the network layout"));
        }
        let header = CheckpointHeader {
            version: FORMAT_VERSION,
            module: format!("denoiser-{}", self.config.variant),
            hidden: self.config.hidden as u64,
            steps: self.config.steps as u64,
            cond_dim: self.config.cond_dim as u64,
            basis_rows: self.config.basis_rows as u64,
        };
        checkpoint::save(path, &header, params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.save_params(path, &self.params)
    }

    /// Loads a checkpoint written by [`Denoiser::save`]; the header must
    /// agree with `config`.
    pub fn load(config: DenoiserConfig, path: &Path) -> Result<Self> {
        let (h, params) = checkpoint::load(path)?;
        let expected = format!("denoiser-{}", config.variant);
        let dims = [h.hidden, h.steps, h.cond_dim, h.basis_rows];
        let want = [config.hidden, config.steps, config.cond_dim, config.basis_rows].map(|v| v as u64);
        if h.module != expected || dims != want {
            return Err(Error::Config(format!(
                "checkpoint {} holds {} with H={} T={} C={} L={}, expected {expected} with H={} T={} C={} L={}",
                path.display(),
                h.module,
                dims[0],
                dims[1],
                dims[2],
                dims[3],
                want[0],
                want[1],
                want[2],
                want[3]
            )));
        }
        Self::from_params(config, params)
    }

    pub fn config(&self) -> &DenoiserConfig {
        &self.config
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    /// Sets every PV-branch parameter to zero, which removes the branch's
    /// contribution to the output.
    pub fn zero_physics_branch(&mut self) {
        let names: Vec<String> = self
            .params
            .names()
            .filter(|n| n.starts_with(PHYSICS_PREFIX))
            .map(str::to_owned)
            .collect();
        for n in names {
            if let Some(t) = self.params.get_mut(&n) {
                t.fill(0.0);
            }
        }
    }

    pub fn into_params(self) -> ParamSet {
        self.params
    }

    fn linear(g: &mut Graph, x: Var, name: &str) -> Result<Var> {
        let w = g.param(&format!("{name}.w"))?;
        let b = g.param(&format!("{name}.b"))?;
        let y = g.matmul(x, w)?;
        g.add_bias(y, b)
    }

    fn expect_cols(&self, g: &Graph, v: Var, cols: usize, what: &str) -> Result<()> {
        let t = g.value(v);
        if t.shape().len() != 2 || t.cols() != cols {
            return Err(Error::contract(format!("{what} has shape {:?}, expected (B, {cols})", t.shape())));
        }
        Ok(())
    }

    /// Final LSTM hidden state, `B x T -> B x H`.
    pub fn lstm_embed(&self, g: &mut Graph, x: Var) -> Result<Var> {
        self.expect_cols(g, x, self.config.steps, "noisy profile")?;
        let wi = g.param("lstm.w_ih")?;
        let wh = g.param("lstm.w_hh")?;
        let b = g.param("lstm.b")?;
        g.lstm(x, wi, wh, b)
    }

    /// Multi-head self-attention over the tokens of each row, plus residual.
    pub fn self_attention(&self, g: &mut Graph, h: Var) -> Result<Var> {
        self.expect_cols(g, h, self.config.hidden, "hidden state")?;
        let batch = g.value(h).rows();
        let (s, d) = (self.config.tokens, self.config.token_width());
        let tokens = g.reshape(h, &[batch * s, d])?;
        let q = Self::linear(g, tokens, "attn.q")?;
        let k = Self::linear(g, tokens, "attn.k")?;
        let v = Self::linear(g, tokens, "attn.v")?;
        let a = g.attention(q, k, v, s, self.config.heads)?;
        let o = Self::linear(g, a, "attn.o")?;
        let r = g.add(tokens, o)?;
        g.reshape(r, &[batch, self.config.hidden])
    }

    /// `B x C -> B x H`.
    pub fn cond_embed(&self, g: &mut Graph, y: Var) -> Result<Var> {
        self.expect_cols(g, y, self.config.cond_dim, "condition")?;
        let a = Self::linear(g, y, "cond.0")?;
        let a = g.leaky_relu(a, self.config.leaky_slope);
        Self::linear(g, a, "cond.1")
    }

    /// Product of the basis branch and the condition branch, `B x H`.
    pub fn pv_embedding(&self, g: &mut Graph, y: Var, basis: Var) -> Result<Var> {
        if self.config.variant != Variant::PhysicsInformed {
            return Err(Error::contract("baseline network has no PV embedding"));
        }
        self.expect_cols(g, y, self.config.cond_dim, "condition")?;
        let bt = g.value(basis);
        let flat_cols = self.config.basis_rows * self.config.steps;
        let batch = bt.rows();
        let basis = match bt.shape() {
            [_, l, t] if *l == self.config.basis_rows && *t == self.config.steps => g.reshape(basis, &[batch, flat_cols])?,
            [_, c] if *c == flat_cols => basis,
            other => {
                return Err(Error::contract(format!(
                    "basis has shape {other:?}, expected (B, {}, {})",
                    self.config.basis_rows, self.config.steps
                )))
            }
        };
        let mut b = basis;
        for layer in ["pv_basis.0", "pv_basis.1", "pv_basis.2"] {
            let z = Self::linear(g, b, layer)?;
            b = g.tanh(z);
        }
        let mut c = y;
        for layer in ["pv_cond.0", "pv_cond.1"] {
            let z = Self::linear(g, c, layer)?;
            c = g.tanh(z);
        }
        g.mul(b, c)
    }

    /// Predicted noise `B x T` for noisy profiles `x`, per-row noise levels
    /// `sqrt(alpha_bar)`, conditions `y` and, for the physics-informed
    /// variant, flattened basis profiles.
    pub fn forward(&self, g: &mut Graph, x: Var, levels: &[f64], y: Var, basis: Option<Var>) -> Result<Var> {
        let batch = g.value(x).rows();
        if levels.len() != batch || g.value(y).rows() != batch {
            return Err(Error::contract(format!(
                "batch mismatch: {batch} profiles, {} levels, {} conditions",
                levels.len(),
                g.value(y).rows()
            )));
        }
        match (self.config.variant, basis) {
            (Variant::PhysicsInformed, None) => return Err(Error::input("physics-informed network needs basis profiles")),
            (Variant::Baseline, Some(_)) => return Err(Error::input("baseline network takes no basis profiles")),
            _ => {}
        }
        let hidden = self.config.hidden;
        let mut pe = Vec::with_capacity(batch * hidden);
        for &level in levels {
            pe.extend(positional_embedding(level, hidden, self.config.k_scale));
        }
        let pe = g.constant(Tensor::new(vec![batch, hidden], pe)?);

        let h = self.lstm_embed(g, x)?;
        let h = g.add(h, pe)?;
        let h = self.self_attention(g, h)?;
        let h = Self::linear(g, h, "mlp.0")?;
        let h = g.leaky_relu(h, self.config.leaky_slope);
        let h = Self::linear(g, h, "mlp.1")?;
        let c = self.cond_embed(g, y)?;
        let mut h = g.add(h, c)?;
        if let Some(basis) = basis {
            let p = self.pv_embedding(g, y, basis)?;
            h = g.add(h, p)?;
        }
        Self::linear(g, h, "out")
    }

    /// Forward pass without gradient bookkeeping.
    pub fn predict(&self, x: &Tensor, levels: &[f64], y: &Tensor, basis: Option<&Tensor>) -> Result<Tensor> {
        let mut g = Graph::inference(&self.params);
        let xv = g.constant(x.clone());
        let yv = g.constant(y.clone());
        let bv = basis.map(|b| g.constant(b.clone()));
        let out = self.forward(&mut g, xv, levels, yv, bv)?;
        Ok(g.value(out).clone())
    }
}
