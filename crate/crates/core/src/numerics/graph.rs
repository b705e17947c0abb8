//! Reverse-mode differentiation over a recorded computation.
//!
//! A [`Graph`] records every operation applied to its nodes. Parameters are
//! borrowed from a [`ParamSet`] rather than copied; [`Graph::backward`]
//! returns a [`Gradients`] value that is folded back into the parameter set
//! once the graph is dropped.
//!
//! Matrix-shaped ops treat a tensor as `rows x cols` where `rows` is the
//! leading dimension. The recurrent cell and the attention kernel are fused
//! ops with hand-written adjoints.

use super::tensor::gemm;
use super::{ParamSet, Tensor};
use crate::{Error, Result};

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

enum Value {
    Owned(Tensor),
    Param(usize),
}

struct LstmCache {
    batch: usize,
    steps: usize,
    hidden: usize,
    /// Hidden states h_0..h_T, each `batch x hidden`.
    hs: Vec<f64>,
    /// Cell states c_0..c_T.
    cs: Vec<f64>,
    /// Gate activations [i | f | g | o] per step, each `batch x 4*hidden`.
    acts: Vec<f64>,
}

struct AttnCache {
    batch: usize,
    tokens: usize,
    heads: usize,
    /// Softmax weights, `batch x heads x tokens x tokens`.
    probs: Vec<f64>,
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    AddBias(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Tanh(Var),
    Sigmoid(Var),
    LeakyRelu(Var, f64),
    Reshape(Var),
    Sum(Var),
    RowNormMean(Var),
    Lstm {
        x: Var,
        w_ih: Var,
        w_hh: Var,
        bias: Var,
        cache: Option<Box<LstmCache>>,
    },
    Attention {
        q: Var,
        k: Var,
        v: Var,
        cache: Option<Box<AttnCache>>,
    },
}

struct Node {
    value: Value,
    op: Op,
}

/// Gradients of a scalar output with respect to the parameters it used.
#[derive(Debug, Clone, Default)]
pub struct Gradients {
    entries: Vec<(usize, Tensor)>,
}

impl Gradients {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl ParamSet {
    /// Adds `grads` into the gradient slots.
    pub fn accumulate(&mut self, grads: &Gradients) {
        for (idx, g) in &grads.entries {
            self.accumulate_grad(*idx, g);
        }
    }
}

/// A recorded computation over tensors.
pub struct Graph<'p> {
    params: Option<&'p ParamSet>,
    nodes: Vec<Node>,
    record: bool,
}

impl<'p> Graph<'p> {
    /// Graph whose parameter nodes borrow from `params`.
    pub fn new(params: &'p ParamSet) -> Self {
        Self {
            params: Some(params),
            nodes: Vec::new(),
            record: true,
        }
    }

    /// Graph without a parameter set; only constants can enter it.
    pub fn detached() -> Graph<'static> {
        Graph {
            params: None,
            nodes: Vec::new(),
            record: true,
        }
    }

    /// Forward-only graph: fused ops skip the caches needed for backward.
    pub fn inference(params: &'p ParamSet) -> Self {
        Self {
            params: Some(params),
            nodes: Vec::new(),
            record: false,
        }
    }

    pub fn value(&self, v: Var) -> &Tensor {
        match &self.nodes[v.0].value {
            Value::Owned(t) => t,
            Value::Param(idx) => self
                .params
                .expect("param node without parameter set")
                .value_at(*idx),
        }
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node {
            value: Value::Owned(value),
            op,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf)
    }

    pub fn param(&mut self, name: &str) -> Result<Var> {
        let params = self
            .params
            .ok_or_else(|| Error::contract("graph has no parameter set"))?;
        let idx = params
            .index_of(name)
            .ok_or_else(|| Error::contract(format!("unknown parameter `{name}`")))?;
        self.nodes.push(Node {
            value: Value::Param(idx),
            op: Op::Leaf,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
        if tb.rows() != k || tb.shape().len() > 2 {
            return Err(Error::contract(format!(
                "matmul {:?} x {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, ta.data(), false, tb.data(), false, &mut out, 0.0);
        Ok(self.push(Tensor::new(vec![m, n], out)?, Op::MatMul(a, b)))
    }

    /// Adds a bias vector to every row of `x`.
    pub fn add_bias(&mut self, x: Var, b: Var) -> Result<Var> {
        let (tx, tb) = (self.value(x), self.value(b));
        let n = tx.cols();
        if tb.len() != n {
            return Err(Error::contract(format!(
                "bias of {} for {:?}",
                tb.len(),
                tx.shape()
            )));
        }
        let mut out = tx.clone();
        for r in 0..out.rows() {
            for (o, bv) in out.row_mut(r).iter_mut().zip(tb.data()) {
                *o += bv;
            }
        }
        Ok(self.push(out, Op::AddBias(x, b)))
    }

    fn zip_with(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(Error::contract(format!(
                "elementwise op on {:?} and {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        let out = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(out, op))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn scale(&mut self, x: Var, s: f64) -> Var {
        let out = self.value(x).map(|v| v * s);
        self.push(out, Op::Scale(x, s))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let out = self.value(x).map(f64::tanh);
        self.push(out, Op::Tanh(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = self.value(x).map(sigmoid);
        self.push(out, Op::Sigmoid(x))
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Var {
        let out = self.value(x).map(|v| if v > 0.0 { v } else { slope * v });
        self.push(out, Op::LeakyRelu(x, slope))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let out = self.value(x).clone().reshape(shape)?;
        Ok(self.push(out, Op::Reshape(x)))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(x))
    }

    /// Mean over rows of the Euclidean norm of each row.
    pub fn row_norm_mean(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let rows = t.rows();
        let total: f64 = (0..rows).map(|r| norm(t.row(r))).sum();
        self.push(Tensor::scalar(total / rows as f64), Op::RowNormMean(x))
    }

    /// Single-layer LSTM over `x: batch x steps` with scalar input per step.
    ///
    /// Weights: `w_ih: 1 x 4H`, `w_hh: H x 4H`, `bias: 4H`, gate order
    /// input, forget, cell, output. Returns the final hidden state `batch x H`.
    pub fn lstm(&mut self, x: Var, w_ih: Var, w_hh: Var, bias: Var) -> Result<Var> {
        let (tx, twi, twh, tb) = (
            self.value(x),
            self.value(w_ih),
            self.value(w_hh),
            self.value(bias),
        );
        let hidden = twh.rows();
        let g4 = 4 * hidden;
        if twh.cols() != g4 || twi.len() != g4 || tb.len() != g4 {
            return Err(Error::contract(format!(
                "lstm weights w_ih {:?} w_hh {:?} bias {:?}",
                twi.shape(),
                twh.shape(),
                tb.shape()
            )));
        }
        let (batch, steps) = (tx.rows(), tx.cols());
        let bh = batch * hidden;
        let record = self.record;
        let mut h_prev = vec![0.0; bh];
        let mut c_prev = vec![0.0; bh];
        let mut h_cur = vec![0.0; bh];
        let mut c_cur = vec![0.0; bh];
        let mut pre = vec![0.0; batch * g4];
        let mut act = vec![0.0; batch * g4];
        let (mut hs, mut cs, mut acts) = if record {
            let mut hs = Vec::with_capacity((steps + 1) * bh);
            let mut cs = Vec::with_capacity((steps + 1) * bh);
            hs.extend_from_slice(&h_prev);
            cs.extend_from_slice(&c_prev);
            (hs, cs, Vec::with_capacity(steps * batch * g4))
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };
        for t in 0..steps {
            for b in 0..batch {
                let xv = tx.data()[b * steps + t];
                let row = &mut pre[b * g4..(b + 1) * g4];
                for ((p, wi), bi) in row.iter_mut().zip(twi.data()).zip(tb.data()) {
                    *p = xv * wi + bi;
                }
            }
            gemm(batch, hidden, g4, &h_prev, false, twh.data(), false, &mut pre, 1.0);
            for b in 0..batch {
                let p = &pre[b * g4..(b + 1) * g4];
                let a = &mut act[b * g4..(b + 1) * g4];
                for j in 0..hidden {
                    let i_g = sigmoid(p[j]);
                    let f_g = sigmoid(p[hidden + j]);
                    let g_g = p[2 * hidden + j].tanh();
                    let o_g = sigmoid(p[3 * hidden + j]);
                    a[j] = i_g;
                    a[hidden + j] = f_g;
                    a[2 * hidden + j] = g_g;
                    a[3 * hidden + j] = o_g;
                    let k = b * hidden + j;
                    let c = f_g * c_prev[k] + i_g * g_g;
                    c_cur[k] = c;
                    h_cur[k] = o_g * c.tanh();
                }
            }
            if record {
                hs.extend_from_slice(&h_cur);
                cs.extend_from_slice(&c_cur);
                acts.extend_from_slice(&act);
            }
            std::mem::swap(&mut h_prev, &mut h_cur);
            std::mem::swap(&mut c_prev, &mut c_cur);
        }
        let out = Tensor::new(vec![batch, hidden], h_prev)?;
        let cache = record.then(|| {
            Box::new(LstmCache {
                batch,
                steps,
                hidden,
                hs,
                cs,
                acts,
            })
        });
        Ok(self.push(
            out,
            Op::Lstm {
                x,
                w_ih,
                w_hh,
                bias,
                cache,
            },
        ))
    }

    /// Multi-head scaled dot-product attention.
    ///
    /// `q`, `k`, `v` are `(batch * tokens) x width`; each block of `tokens`
    /// consecutive rows attends only within itself. `width` is split into
    /// `heads` equal slices.
    pub fn attention(&mut self, q: Var, k: Var, v: Var, tokens: usize, heads: usize) -> Result<Var> {
        let (tq, tk, tv) = (self.value(q), self.value(k), self.value(v));
        let (rows, width) = (tq.rows(), tq.cols());
        if tk.shape() != tq.shape() || tv.shape() != tq.shape() {
            return Err(Error::contract("attention q/k/v shapes differ"));
        }
        if tokens == 0 || heads == 0 || rows % tokens != 0 || width % heads != 0 {
            return Err(Error::contract(format!(
                "attention over {rows}x{width} with {tokens} tokens and {heads} heads"
            )));
        }
        let batch = rows / tokens;
        let dh = width / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let (qd, kd, vd) = (tq.data(), tk.data(), tv.data());
        let mut out = vec![0.0; rows * width];
        let mut probs = vec![0.0; batch * heads * tokens * tokens];
        for b in 0..batch {
            for h in 0..heads {
                let pbase = (b * heads + h) * tokens * tokens;
                for i in 0..tokens {
                    let qi = &qd[(b * tokens + i) * width + h * dh..][..dh];
                    let prow = &mut probs[pbase + i * tokens..pbase + (i + 1) * tokens];
                    for (j, p) in prow.iter_mut().enumerate() {
                        let kj = &kd[(b * tokens + j) * width + h * dh..][..dh];
                        *p = scale * dot(qi, kj);
                    }
                    softmax_in_place(prow);
                    let oi = &mut out[(b * tokens + i) * width + h * dh..][..dh];
                    for (j, &p) in prow.iter().enumerate() {
                        let vj = &vd[(b * tokens + j) * width + h * dh..][..dh];
                        for (o, &vv) in oi.iter_mut().zip(vj) {
                            *o += p * vv;
                        }
                    }
                }
            }
        }
        let cache = self.record.then(|| {
            Box::new(AttnCache {
                batch,
                tokens,
                heads,
                probs,
            })
        });
        Ok(self.push(
            Tensor::new(vec![rows, width], out)?,
            Op::Attention { q, k, v, cache },
        ))
    }

    /// Reverse pass from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lt = self.value(loss);
        let lv = lt
            .item()
            .ok_or_else(|| Error::contract(format!("loss must be scalar, got {:?}", lt.shape())))?;
        if !lv.is_finite() {
            return Err(Error::Numeric(format!("loss is {lv}")));
        }
        if !self.record {
            return Err(Error::contract("backward on an inference graph"));
        }
        let mut grads: Vec<Option<Tensor>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::full(lt.shape(), 1.0));
        let mut out = Gradients::default();

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf => {
                    if let Value::Param(p) = node.value {
                        out.entries.push((p, g));
                    }
                }
                Op::MatMul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
                    let mut da = vec![0.0; m * k];
                    gemm(m, n, k, g.data(), false, tb.data(), true, &mut da, 0.0);
                    let mut db = vec![0.0; k * n];
                    gemm(k, m, n, ta.data(), true, g.data(), false, &mut db, 0.0);
                    acc(&mut grads, *a, Tensor::new(ta.shape().to_vec(), da)?);
                    acc(&mut grads, *b, Tensor::new(tb.shape().to_vec(), db)?);
                }
                Op::AddBias(x, b) => {
                    let tb = self.value(*b);
                    let mut db = vec![0.0; tb.len()];
                    for r in 0..g.rows() {
                        for (d, gv) in db.iter_mut().zip(g.row(r)) {
                            *d += gv;
                        }
                    }
                    acc(&mut grads, *b, Tensor::new(tb.shape().to_vec(), db)?);
                    acc(&mut grads, *x, g);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g);
                }
                Op::Sub(a, b) => {
                    acc(&mut grads, *b, g.map(|v| -v));
                    acc(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    acc(&mut grads, *a, zip(&g, tb, |gv, y| gv * y));
                    acc(&mut grads, *b, zip(&g, ta, |gv, x| gv * x));
                }
                Op::Scale(x, s) => acc(&mut grads, *x, g.map(|v| v * s)),
                Op::Tanh(x) => {
                    let y = self.value(Var(idx));
                    acc(&mut grads, *x, zip(&g, y, |gv, yv| gv * (1.0 - yv * yv)));
                }
                Op::Sigmoid(x) => {
                    let y = self.value(Var(idx));
                    acc(&mut grads, *x, zip(&g, y, |gv, yv| gv * yv * (1.0 - yv)));
                }
                Op::LeakyRelu(x, slope) => {
                    let tx = self.value(*x);
                    let s = *slope;
                    acc(&mut grads, *x, zip(&g, tx, |gv, xv| if xv > 0.0 { gv } else { s * gv }));
                }
                Op::Reshape(x) => {
                    let shape = self.value(*x).shape().to_vec();
                    acc(&mut grads, *x, g.reshape(&shape)?);
                }
                Op::Sum(x) => {
                    let gv = g.data()[0];
                    acc(&mut grads, *x, Tensor::full(self.value(*x).shape(), gv));
                }
                Op::RowNormMean(x) => {
                    let tx = self.value(*x);
                    let rows = tx.rows();
                    let gv = g.data()[0] / rows as f64;
                    let mut dx = Tensor::zeros(tx.shape());
                    for r in 0..rows {
                        let nrm = norm(tx.row(r));
                        if nrm > 0.0 {
                            for (d, xv) in dx.row_mut(r).iter_mut().zip(tx.row(r)) {
                                *d = gv * xv / nrm;
                            }
                        }
                    }
                    acc(&mut grads, *x, dx);
                }
                Op::Lstm {
                    x,
                    w_ih,
                    w_hh,
                    bias,
                    cache,
                } => {
                    let cache = cache.as_ref().expect("recorded graph keeps lstm cache");
                    let (dx, dwi, dwh, db) = self.lstm_backward(cache, &g, *x, *w_ih, *w_hh)?;
                    acc(&mut grads, *x, dx);
                    acc(&mut grads, *w_ih, dwi);
                    acc(&mut grads, *w_hh, dwh);
                    acc(&mut grads, *bias, db);
                }
                Op::Attention { q, k, v, cache } => {
                    let cache = cache.as_ref().expect("recorded graph keeps attention cache");
                    let (dq, dk, dv) = self.attention_backward(cache, &g, *q, *k, *v)?;
                    acc(&mut grads, *q, dq);
                    acc(&mut grads, *k, dk);
                    acc(&mut grads, *v, dv);
                }
            }
        }
        // Parameters used more than once appear once per use; merge so the
        // caller sees one entry per parameter in ascending index order.
        out.entries.sort_by_key(|(p, _)| *p);
        let mut merged: Vec<(usize, Tensor)> = Vec::with_capacity(out.entries.len());
        for (p, g) in out.entries {
            match merged.last_mut() {
                Some((lp, lg)) if *lp == p => lg.add_assign(&g),
                _ => merged.push((p, g)),
            }
        }
        out.entries = merged;
        Ok(out)
    }

    fn lstm_backward(
        &self,
        c: &LstmCache,
        g: &Tensor,
        x: Var,
        w_ih: Var,
        w_hh: Var,
    ) -> Result<(Tensor, Tensor, Tensor, Tensor)> {
        let (batch, steps, hidden) = (c.batch, c.steps, c.hidden);
        let g4 = 4 * hidden;
        let bh = batch * hidden;
        let (tx, twi, twh) = (self.value(x), self.value(w_ih), self.value(w_hh));
        let mut dx = vec![0.0; batch * steps];
        let mut dwi = vec![0.0; g4];
        let mut dwh = vec![0.0; hidden * g4];
        let mut db = vec![0.0; g4];
        let mut dh = g.data().to_vec();
        let mut dc = vec![0.0; bh];
        let mut dpre = vec![0.0; batch * g4];
        for t in (0..steps).rev() {
            let a = &c.acts[t * batch * g4..(t + 1) * batch * g4];
            let c_prev = &c.cs[t * bh..(t + 1) * bh];
            let c_cur = &c.cs[(t + 1) * bh..(t + 2) * bh];
            for b in 0..batch {
                let ab = &a[b * g4..(b + 1) * g4];
                let dp = &mut dpre[b * g4..(b + 1) * g4];
                for j in 0..hidden {
                    let k = b * hidden + j;
                    let (i_g, f_g, g_g, o_g) =
                        (ab[j], ab[hidden + j], ab[2 * hidden + j], ab[3 * hidden + j]);
                    let tc = c_cur[k].tanh();
                    let d_o = dh[k] * tc;
                    let dck = dc[k] + dh[k] * o_g * (1.0 - tc * tc);
                    dp[j] = dck * g_g * i_g * (1.0 - i_g);
                    dp[hidden + j] = dck * c_prev[k] * f_g * (1.0 - f_g);
                    dp[2 * hidden + j] = dck * i_g * (1.0 - g_g * g_g);
                    dp[3 * hidden + j] = d_o * o_g * (1.0 - o_g);
                    dc[k] = dck * f_g;
                }
                let xv = tx.data()[b * steps + t];
                let mut dxv = 0.0;
                for ((dw, d), w) in dwi.iter_mut().zip(dp.iter()).zip(twi.data()) {
                    *dw += xv * d;
                    dxv += d * w;
                }
                dx[b * steps + t] = dxv;
                for (s, d) in db.iter_mut().zip(dp.iter()) {
                    *s += d;
                }
            }
            let h_prev = &c.hs[t * bh..(t + 1) * bh];
            gemm(hidden, batch, g4, h_prev, true, &dpre, false, &mut dwh, 1.0);
            gemm(batch, g4, hidden, &dpre, false, twh.data(), true, &mut dh, 0.0);
        }
        Ok((
            Tensor::new(tx.shape().to_vec(), dx)?,
            Tensor::new(twi.shape().to_vec(), dwi)?,
            Tensor::new(twh.shape().to_vec(), dwh)?,
            Tensor::new(vec![g4], db)?,
        ))
    }

    fn attention_backward(
        &self,
        c: &AttnCache,
        g: &Tensor,
        q: Var,
        k: Var,
        v: Var,
    ) -> Result<(Tensor, Tensor, Tensor)> {
        let (tq, tk, tv) = (self.value(q), self.value(k), self.value(v));
        let width = tq.cols();
        let (batch, tokens, heads) = (c.batch, c.tokens, c.heads);
        let dh = width / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let (qd, kd, vd, gd) = (tq.data(), tk.data(), tv.data(), g.data());
        let mut dq = vec![0.0; qd.len()];
        let mut dk = vec![0.0; kd.len()];
        let mut dv = vec![0.0; vd.len()];
        let mut dp = vec![0.0; tokens];
        for b in 0..batch {
            for h in 0..heads {
                let pbase = (b * heads + h) * tokens * tokens;
                for i in 0..tokens {
                    let prow = &c.probs[pbase + i * tokens..pbase + (i + 1) * tokens];
                    let gi = &gd[(b * tokens + i) * width + h * dh..][..dh];
                    for j in 0..tokens {
                        let off = (b * tokens + j) * width + h * dh;
                        dp[j] = dot(gi, &vd[off..off + dh]);
                        for (d, gv) in dv[off..off + dh].iter_mut().zip(gi) {
                            *d += prow[j] * gv;
                        }
                    }
                    let inner: f64 = prow.iter().zip(&dp).map(|(p, d)| p * d).sum();
                    let qoff = (b * tokens + i) * width + h * dh;
                    for j in 0..tokens {
                        let ds = prow[j] * (dp[j] - inner) * scale;
                        if ds == 0.0 {
                            continue;
                        }
                        let koff = (b * tokens + j) * width + h * dh;
                        for d in 0..dh {
                            dq[qoff + d] += ds * kd[koff + d];
                            dk[koff + d] += ds * qd[qoff + d];
                        }
                    }
                }
            }
        }
        let shape = tq.shape().to_vec();
        Ok((
            Tensor::new(shape.clone(), dq)?,
            Tensor::new(shape.clone(), dk)?,
            Tensor::new(shape, dv)?,
        ))
    }
}

fn acc(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

fn zip(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::new(a.shape().to_vec(), data).expect("same shape")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}
