//! Building blocks shared by FiLM² and txt2π: dense and convolutional
//! layers, bidirectional LSTM encoders and the two attention summaries.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, Var};
use crate::params::{Bound, ParamId, ParamStore};
use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
}

impl Linear {
    pub fn init(store: &mut ParamStore, name: &str, input: usize, output: usize, rng: &mut impl Rng) -> Self {
        Linear {
            weight: store.add_uniform(format!("{name}.weight"), &[output, input], input, rng),
            bias: store.add_uniform(format!("{name}.bias"), &[output], input, rng),
        }
    }

    pub fn forward(&self, g: &mut Graph, p: &Bound, x: Var) -> Result<Var, ModelError> {
        let wx = g.matvec(p[self.weight], x)?;
        g.add(wx, p[self.bias])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conv {
    pub kernel: ParamId,
    pub bias: ParamId,
}

impl Conv {
    pub fn init(
        store: &mut ParamStore,
        name: &str,
        input: usize,
        output: usize,
        size: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let fan_in = input * size * size;
        Conv {
            kernel: store.add_uniform(format!("{name}.kernel"), &[output, input, size, size], fan_in, rng),
            bias: store.add_uniform(format!("{name}.bias"), &[output], fan_in, rng),
        }
    }

    pub fn forward(&self, g: &mut Graph, p: &Bound, x: Var) -> Result<Var, ModelError> {
        g.conv2d(x, p[self.kernel], p[self.bias])
    }
}

/// One direction of an LSTM: gates `[i, f, g, o]` stacked in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmCell {
    pub w_input: ParamId,
    pub w_hidden: ParamId,
    pub bias: ParamId,
    pub hidden: usize,
}

impl LstmCell {
    pub fn init(store: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        LstmCell {
            w_input: store.add_uniform(format!("{name}.w_input"), &[4 * hidden, input], input, rng),
            w_hidden: store.add_uniform(format!("{name}.w_hidden"), &[4 * hidden, hidden], hidden, rng),
            bias: store.add_uniform(format!("{name}.bias"), &[4 * hidden], hidden, rng),
            hidden,
        }
    }

    fn step(&self, g: &mut Graph, p: &Bound, x: Var, h: Var, c: Var) -> Result<(Var, Var), ModelError> {
        let n = self.hidden;
        let wx = g.matvec(p[self.w_input], x)?;
        let wh = g.matvec(p[self.w_hidden], h)?;
        let pre = g.add(wx, wh)?;
        let pre = g.add(pre, p[self.bias])?;
        let i = g.slice(pre, 0, n)?;
        let i = g.sigmoid(i);
        let f = g.slice(pre, n, n)?;
        let f = g.sigmoid(f);
        let cand = g.slice(pre, 2 * n, n)?;
        let cand = g.tanh(cand);
        let o = g.slice(pre, 3 * n, n)?;
        let o = g.sigmoid(o);
        let keep = g.mul(f, c)?;
        let write = g.mul(i, cand)?;
        let c_next = g.add(keep, write)?;
        let squashed = g.tanh(c_next);
        let h_next = g.mul(o, squashed)?;
        Ok((h_next, c_next))
    }

    /// Hidden states for each position of `inputs`, in input order.
    fn run(&self, g: &mut Graph, p: &Bound, inputs: &[Var], reverse: bool) -> Result<Vec<Var>, ModelError> {
        let zeros = crate::tensor::Tensor::zeros(&[self.hidden]);
        let mut h = g.leaf(zeros.clone());
        let mut c = g.leaf(zeros);
        let mut out = vec![h; inputs.len()];
        let order: Vec<usize> = if reverse {
            (0..inputs.len()).rev().collect()
        } else {
            (0..inputs.len()).collect()
        };
        for t in order {
            let (hn, cn) = self.step(g, p, inputs[t], h, c)?;
            h = hn;
            c = cn;
            out[t] = h;
        }
        Ok(out)
    }
}

/// Single-layer bidirectional LSTM; outputs `[L, 2 * hidden]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiLstm {
    pub forward: LstmCell,
    pub backward: LstmCell,
}

impl BiLstm {
    pub fn init(store: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        BiLstm {
            forward: LstmCell::init(store, &format!("{name}.fwd"), input, hidden, rng),
            backward: LstmCell::init(store, &format!("{name}.bwd"), input, hidden, rng),
        }
    }

    pub fn output_width(&self) -> usize {
        2 * self.forward.hidden
    }

    /// `embedded` is `[L, D]`.
    pub fn encode(&self, g: &mut Graph, p: &Bound, embedded: Var) -> Result<Var, ModelError> {
        let shape = g.shape(embedded).to_vec();
        if shape.len() != 2 || shape[0] == 0 {
            return Err(ModelError::ShapeMismatch(format!("bilstm input {shape:?}")));
        }
        let (len, d) = (shape[0], shape[1]);
        let mut rows = Vec::with_capacity(len);
        for t in 0..len {
            rows.push(g.slice(embedded, t * d, d)?);
        }
        let fwd = self.forward.run(g, p, &rows, false)?;
        let bwd = self.backward.run(g, p, &rows, true)?;
        let mut states = Vec::with_capacity(len);
        for (hf, hb) in fwd.into_iter().zip(bwd) {
            states.push(g.concat(&[hf, hb])?);
        }
        g.stack(&states)
    }
}

/// Learned scorer for a self-attention summary: `a'_i = w . h_i + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfAttention {
    pub w: ParamId,
    pub b: ParamId,
}

impl SelfAttention {
    pub fn init(store: &mut ParamStore, name: &str, width: usize, rng: &mut impl Rng) -> Self {
        SelfAttention {
            w: store.add_uniform(format!("{name}.w"), &[width], width, rng),
            b: store.add_uniform(format!("{name}.b"), &[1], width, rng),
        }
    }

    /// Returns `(summary, weights)`.
    pub fn forward(&self, g: &mut Graph, p: &Bound, states: Var) -> Result<(Var, Var), ModelError> {
        self_attention(g, states, p[self.w], p[self.b])
    }
}

/// `c = sum_i softmax(H w + b)_i h_i`; returns `(c, weights)`.
pub fn self_attention(g: &mut Graph, states: Var, w: Var, b: Var) -> Result<(Var, Var), ModelError> {
    let logits = g.matvec(states, w)?;
    let logits = g.add_scalar(logits, b)?;
    let weights = g.softmax(logits)?;
    let summary = g.vecmat(weights, states)?;
    Ok((summary, weights))
}

/// Dot-product attention of `query` over the rows of `states`; returns `(c, weights)`.
pub fn attend(g: &mut Graph, states: Var, query: Var) -> Result<(Var, Var), ModelError> {
    let logits = g.matvec(states, query)?;
    let weights = g.softmax(logits)?;
    let summary = g.vecmat(weights, states)?;
    Ok((summary, weights))
}
