//! Tape-based reverse-mode differentiation over [`Tensor`] values.
//!
//! Every operation appends a node holding its forward value and the
//! indices of its inputs. [`Graph::backward`] walks the tape in reverse
//! and accumulates gradients for every node, so gradients of leaves
//! (parameters) can be read back with [`Gradients::of`].

use crate::tensor::Tensor;
use crate::ModelError;

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub(crate) usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddConst(Var),
    Scale(Var, f64),
    AddScalar(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    Tanh(Var),
    Softmax(Var),
    MatVec(Var, Var),
    VecMat(Var, Var),
    Conv2d { input: Var, kernel: Var, bias: Var },
    MaxPoolSpatial { input: Var, argmax: Vec<usize> },
    BroadcastSpatial { input: Var, area: usize },
    Concat(Vec<Var>),
    Slice { input: Var, start: usize },
    Stack(Vec<Var>),
    EmbedRows { table: Var, indices: Vec<usize> },
    EmbedBagGrid { table: Var, cells: Vec<Vec<usize>> },
    Sum(Var),
    Entropy(Var),
    Rms(Var),
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
}

/// A single forward pass. Not shared across threads; build one per pass.
#[derive(Debug, Default, Clone)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Gradients of one scalar output with respect to every node of a graph.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient for `v`, zeros if `v` did not influence the output.
    pub fn of(&self, v: Var) -> Tensor {
        match &self.grads[v.0] {
            Some(g) => Tensor {
                shape: self.shapes[v.0].clone(),
                data: g.clone(),
            },
            None => Tensor::zeros(&self.shapes[v.0]),
        }
    }
}

fn shape_err(msg: String) -> ModelError {
    ModelError::ShapeMismatch(msg)
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].value.shape
    }

    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<(), ModelError> {
        if self.shape(a) != self.shape(b) {
            return Err(shape_err(format!("{what}: {:?} vs {:?}", self.shape(a), self.shape(b))));
        }
        Ok(())
    }

    fn zip(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Tensor {
        let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        Tensor {
            shape: va.shape.clone(),
            data: va.data.iter().zip(&vb.data).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, ModelError> {
        self.same_shape(a, b, "add")?;
        let t = self.zip(a, b, |x, y| x + y);
        Ok(self.push(t, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, ModelError> {
        self.same_shape(a, b, "sub")?;
        let t = self.zip(a, b, |x, y| x - y);
        Ok(self.push(t, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, ModelError> {
        self.same_shape(a, b, "mul")?;
        let t = self.zip(a, b, |x, y| x * y);
        Ok(self.push(t, Op::Mul(a, b)))
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        let t = self.value(a).map(|x| x + c);
        self.push(t, Op::AddConst(a))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let t = self.value(a).map(|x| x * c);
        self.push(t, Op::Scale(a, c))
    }

    /// Adds a one-element tensor to every entry of `a`.
    pub fn add_scalar(&mut self, a: Var, s: Var) -> Result<Var, ModelError> {
        if self.value(s).len() != 1 {
            return Err(shape_err(format!("add_scalar: {:?}", self.shape(s))));
        }
        let c = self.value(s).item();
        let t = self.value(a).map(|x| x + c);
        Ok(self.push(t, Op::AddScalar(a, s)))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let t = self.value(a).map(|x| x.max(0.0));
        self.push(t, Op::Relu(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let t = self.value(a).map(|x| 1.0 / (1.0 + (-x).exp()));
        self.push(t, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let t = self.value(a).map(f64::tanh);
        self.push(t, Op::Tanh(a))
    }

    /// Softmax over all entries of `a`.
    pub fn softmax(&mut self, a: Var) -> Result<Var, ModelError> {
        let x = self.value(a);
        if x.is_empty() {
            return Err(shape_err("softmax of empty tensor".into()));
        }
        let t = Tensor {
            shape: x.shape.clone(),
            data: softmax(&x.data),
        };
        Ok(self.push(t, Op::Softmax(a)))
    }

    /// `[r, c] x [c] -> [r]`; any leading-axis tensor is viewed as `[rows, row_len]`.
    pub fn matvec(&mut self, m: Var, v: Var) -> Result<Var, ModelError> {
        let (mv, vv) = (self.value(m), self.value(v));
        let (r, c) = (mv.rows(), mv.row_len());
        if mv.rank() < 2 || c != vv.len() {
            return Err(shape_err(format!("matvec: {:?} x {:?}", mv.shape, vv.shape)));
        }
        let data = (0..r)
            .map(|i| mv.row(i).iter().zip(&vv.data).map(|(a, b)| a * b).sum())
            .collect();
        Ok(self.push(Tensor { shape: vec![r], data }, Op::MatVec(m, v)))
    }

    /// `[r] x [r, c] -> [c]`, i.e. `sum_i v_i * m_i`.
    pub fn vecmat(&mut self, v: Var, m: Var) -> Result<Var, ModelError> {
        let (vv, mv) = (self.value(v), self.value(m));
        let (r, c) = (mv.rows(), mv.row_len());
        if mv.rank() < 2 || r != vv.len() {
            return Err(shape_err(format!("vecmat: {:?} x {:?}", vv.shape, mv.shape)));
        }
        let mut data = vec![0.0; c];
        for i in 0..r {
            let w = vv.data[i];
            for (o, x) in data.iter_mut().zip(mv.row(i)) {
                *o += w * x;
            }
        }
        Ok(self.push(Tensor { shape: vec![c], data }, Op::VecMat(v, m)))
    }

    /// Stride-1 convolution with zero padding `k / 2` on each side.
    ///
    /// `input: [Cin, H, W]`, `kernel: [Cout, Cin, k, k]` (odd `k`), `bias: [Cout]`.
    pub fn conv2d(&mut self, input: Var, kernel: Var, bias: Var) -> Result<Var, ModelError> {
        let (x, k, b) = (self.value(input), self.value(kernel), self.value(bias));
        if x.rank() != 3 || k.rank() != 4 || b.rank() != 1 {
            return Err(shape_err(format!(
                "conv2d ranks: {:?} {:?} {:?}",
                x.shape, k.shape, b.shape
            )));
        }
        let (cin, h, w) = (x.shape[0], x.shape[1], x.shape[2]);
        let (cout, kcin, kh, kw) = (k.shape[0], k.shape[1], k.shape[2], k.shape[3]);
        if kcin != cin || b.shape[0] != cout || kh != kw || kh % 2 == 0 {
            return Err(shape_err(format!(
                "conv2d: input {:?} kernel {:?} bias {:?}",
                x.shape, k.shape, b.shape
            )));
        }
        let mut out = vec![0.0; cout * h * w];
        conv_each(cin, h, w, cout, kh, |o, c, y, xx, dy, dx, iy, ix| {
            out[(o * h + y) * w + xx] += k.data[((o * cin + c) * kh + dy) * kw + dx] * x.data[(c * h + iy) * w + ix];
        });
        for o in 0..cout {
            for v in &mut out[o * h * w..(o + 1) * h * w] {
                *v += b.data[o];
            }
        }
        Ok(self.push(
            Tensor {
                shape: vec![cout, h, w],
                data: out,
            },
            Op::Conv2d { input, kernel, bias },
        ))
    }

    /// Per-channel max over the spatial axes: `[C, H, W] -> [C]`.
    pub fn maxpool_spatial(&mut self, input: Var) -> Result<Var, ModelError> {
        let x = self.value(input);
        if x.rank() != 3 || x.shape[1] * x.shape[2] == 0 {
            return Err(shape_err(format!("maxpool_spatial: {:?}", x.shape)));
        }
        let c = x.shape[0];
        let mut argmax = Vec::with_capacity(c);
        let mut data = Vec::with_capacity(c);
        for ch in 0..c {
            let row = x.row(ch);
            let mut best = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            argmax.push(best);
            data.push(row[best]);
        }
        Ok(self.push(Tensor { shape: vec![c], data }, Op::MaxPoolSpatial { input, argmax }))
    }

    /// Replicates a `[C]` vector over an `h x w` grid.
    pub fn broadcast_spatial(&mut self, input: Var, h: usize, w: usize) -> Result<Var, ModelError> {
        let v = self.value(input);
        if v.rank() != 1 {
            return Err(shape_err(format!("broadcast_spatial: {:?}", v.shape)));
        }
        let area = h * w;
        let data = v.data.iter().flat_map(|&x| std::iter::repeat_n(x, area)).collect();
        let shape = vec![v.len(), h, w];
        Ok(self.push(Tensor { shape, data }, Op::BroadcastSpatial { input, area }))
    }

    /// Concatenation along the leading axis; trailing axes must agree.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var, ModelError> {
        let first = parts.first().ok_or_else(|| shape_err("concat of nothing".into()))?;
        let tail: Vec<usize> = self.shape(*first)[1..].to_vec();
        let mut lead = 0;
        let mut data = Vec::new();
        for p in parts {
            let t = self.value(*p);
            if t.shape[1..] != tail[..] {
                return Err(shape_err(format!("concat: {:?} vs tail {:?}", t.shape, tail)));
            }
            lead += t.shape[0];
            data.extend_from_slice(&t.data);
        }
        let mut shape = vec![lead];
        shape.extend(tail);
        Ok(self.push(Tensor { shape, data }, Op::Concat(parts.to_vec())))
    }

    /// Contiguous slice `[start, start + len)` of the flattened data, as a vector.
    pub fn slice(&mut self, input: Var, start: usize, len: usize) -> Result<Var, ModelError> {
        let v = self.value(input);
        if start + len > v.len() {
            return Err(shape_err(format!("slice {start}+{len} of {:?}", v.shape)));
        }
        let t = Tensor::vector(v.data[start..start + len].to_vec());
        Ok(self.push(t, Op::Slice { input, start }))
    }

    /// Stacks equal-length vectors into `[L, D]`.
    pub fn stack(&mut self, rows: &[Var]) -> Result<Var, ModelError> {
        let first = rows.first().ok_or_else(|| shape_err("stack of nothing".into()))?;
        let d = self.value(*first).len();
        let mut data = Vec::with_capacity(d * rows.len());
        for r in rows {
            let t = self.value(*r);
            if t.rank() != 1 || t.len() != d {
                return Err(shape_err(format!("stack: {:?} vs [{d}]", t.shape)));
            }
            data.extend_from_slice(&t.data);
        }
        Ok(self.push(
            Tensor {
                shape: vec![rows.len(), d],
                data,
            },
            Op::Stack(rows.to_vec()),
        ))
    }

    fn check_indices(&self, table: Var, indices: &[usize]) -> Result<(usize, usize), ModelError> {
        let t = self.value(table);
        if t.rank() != 2 {
            return Err(shape_err(format!("embedding table {:?}", t.shape)));
        }
        let (vocab, d) = (t.shape[0], t.shape[1]);
        if let Some(&bad) = indices.iter().find(|&&i| i >= vocab) {
            return Err(ModelError::UnknownToken(bad));
        }
        Ok((vocab, d))
    }

    /// Gathers rows of `table: [V, D]` into `[L, D]`.
    pub fn embed_rows(&mut self, table: Var, indices: &[usize]) -> Result<Var, ModelError> {
        let (_, d) = self.check_indices(table, indices)?;
        if indices.is_empty() {
            return Err(shape_err("embedding of empty sequence".into()));
        }
        let t = self.value(table);
        let data = indices.iter().flat_map(|&i| t.row(i).to_vec()).collect();
        Ok(self.push(
            Tensor {
                shape: vec![indices.len(), d],
                data,
            },
            Op::EmbedRows {
                table,
                indices: indices.to_vec(),
            },
        ))
    }

    /// Bag-of-words grid: cell `y * w + x` sums the embeddings of its tokens.
    /// Output is `[D, h, w]`.
    pub fn embed_bag_grid(&mut self, table: Var, cells: &[Vec<usize>], h: usize, w: usize) -> Result<Var, ModelError> {
        if cells.len() != h * w {
            return Err(shape_err(format!("{} cells for a {h}x{w} grid", cells.len())));
        }
        let flat: Vec<usize> = cells.iter().flatten().copied().collect();
        let (_, d) = self.check_indices(table, &flat)?;
        let t = self.value(table);
        let area = h * w;
        let mut data = vec![0.0; d * area];
        for (cell, toks) in cells.iter().enumerate() {
            for &tok in toks {
                for (k, &e) in t.row(tok).iter().enumerate() {
                    data[k * area + cell] += e;
                }
            }
        }
        Ok(self.push(
            Tensor {
                shape: vec![d, h, w],
                data,
            },
            Op::EmbedBagGrid {
                table,
                cells: cells.to_vec(),
            },
        ))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data.iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    /// `-sum_i p_i ln p_i` with `0 ln 0 = 0`.
    pub fn entropy(&mut self, p: Var) -> Var {
        let s = -self
            .value(p)
            .data
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x * x.ln())
            .sum::<f64>();
        self.push(Tensor::scalar(s), Op::Entropy(p))
    }

    /// Root mean square of all entries.
    pub fn rms(&mut self, a: Var) -> Result<Var, ModelError> {
        let v = self.value(a);
        if v.is_empty() {
            return Err(shape_err("rms of empty tensor".into()));
        }
        let r = (v.data.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        Ok(self.push(Tensor::scalar(r), Op::Rms(a)))
    }

    /// Reverse pass seeded with d(output)/d(output) = 1 for a one-element output.
    pub fn backward(&self, output: Var) -> Result<Gradients, ModelError> {
        if self.value(output).len() != 1 {
            return Err(shape_err(format!("backward from non-scalar {:?}", self.shape(output))));
        }
        let n = self.nodes.len();
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; n];
        grads[output.0] = Some(vec![1.0]);
        for idx in (0..=output.0).rev() {
            let Some(gy) = grads[idx].take() else {
                continue;
            };
            self.propagate(idx, &gy, &mut grads);
            grads[idx] = Some(gy);
        }
        Ok(Gradients {
            grads,
            shapes: self.nodes.iter().map(|n| n.value.shape.clone()).collect(),
        })
    }

    fn propagate(&self, idx: usize, gy: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[idx];
        let y = &node.value.data;
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            let len = self.nodes[v.0].value.len();
            let g = grads[v.0].get_or_insert_with(|| vec![0.0; len]);
            f(g);
        };
        match &node.op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                acc(*a, &mut |g| add_into(g, gy));
                acc(*b, &mut |g| add_into(g, gy));
            }
            Op::Sub(a, b) => {
                acc(*a, &mut |g| add_into(g, gy));
                acc(*b, &mut |g| g.iter_mut().zip(gy).for_each(|(o, d)| *o -= d));
            }
            Op::Mul(a, b) => {
                let (va, vb) = (&self.value(*a).data, &self.value(*b).data);
                acc(*a, &mut |g| {
                    for i in 0..g.len() {
                        g[i] += gy[i] * vb[i];
                    }
                });
                acc(*b, &mut |g| {
                    for i in 0..g.len() {
                        g[i] += gy[i] * va[i];
                    }
                });
            }
            Op::AddConst(a) => acc(*a, &mut |g| add_into(g, gy)),
            Op::Scale(a, c) => acc(*a, &mut |g| g.iter_mut().zip(gy).for_each(|(o, d)| *o += c * d)),
            Op::AddScalar(a, s) => {
                acc(*a, &mut |g| add_into(g, gy));
                let total: f64 = gy.iter().sum();
                acc(*s, &mut |g| g[0] += total);
            }
            Op::Relu(a) => {
                let x = &self.value(*a).data;
                acc(*a, &mut |g| {
                    for i in 0..g.len() {
                        if x[i] > 0.0 {
                            g[i] += gy[i];
                        }
                    }
                });
            }
            Op::Sigmoid(a) => acc(*a, &mut |g| {
                for i in 0..g.len() {
                    g[i] += gy[i] * y[i] * (1.0 - y[i]);
                }
            }),
            Op::Tanh(a) => acc(*a, &mut |g| {
                for i in 0..g.len() {
                    g[i] += gy[i] * (1.0 - y[i] * y[i]);
                }
            }),
            Op::Softmax(a) => {
                let dot: f64 = gy.iter().zip(y).map(|(d, p)| d * p).sum();
                acc(*a, &mut |g| {
                    for i in 0..g.len() {
                        g[i] += y[i] * (gy[i] - dot);
                    }
                });
            }
            Op::MatVec(m, v) => {
                let (mv, vv) = (self.value(*m), self.value(*v));
                let c = mv.row_len();
                acc(*m, &mut |g| {
                    for (i, d) in gy.iter().enumerate() {
                        for j in 0..c {
                            g[i * c + j] += d * vv.data[j];
                        }
                    }
                });
                acc(*v, &mut |g| {
                    for (i, d) in gy.iter().enumerate() {
                        for (gj, m) in g.iter_mut().zip(&mv.data[i * c..(i + 1) * c]) {
                            *gj += d * m;
                        }
                    }
                });
            }
            Op::VecMat(v, m) => {
                let (vv, mv) = (self.value(*v), self.value(*m));
                let c = mv.row_len();
                acc(*v, &mut |g| {
                    for (i, gi) in g.iter_mut().enumerate() {
                        *gi += mv.row(i).iter().zip(gy).map(|(a, b)| a * b).sum::<f64>();
                    }
                });
                acc(*m, &mut |g| {
                    for (i, w) in vv.data.iter().enumerate() {
                        for j in 0..c {
                            g[i * c + j] += w * gy[j];
                        }
                    }
                });
            }
            Op::Conv2d { input, kernel, bias } => {
                let (x, k) = (self.value(*input), self.value(*kernel));
                let (cin, h, w) = (x.shape[0], x.shape[1], x.shape[2]);
                let (cout, kh, kw) = (k.shape[0], k.shape[2], k.shape[3]);
                acc(*input, &mut |g| {
                    conv_each(cin, h, w, cout, kh, |o, c, yy, xx, dy, dx, iy, ix| {
                        g[(c * h + iy) * w + ix] +=
                            k.data[((o * cin + c) * kh + dy) * kw + dx] * gy[(o * h + yy) * w + xx];
                    });
                });
                acc(*kernel, &mut |g| {
                    conv_each(cin, h, w, cout, kh, |o, c, yy, xx, dy, dx, iy, ix| {
                        g[((o * cin + c) * kh + dy) * kw + dx] +=
                            x.data[(c * h + iy) * w + ix] * gy[(o * h + yy) * w + xx];
                    });
                });
                acc(*bias, &mut |g| {
                    for o in 0..cout {
                        g[o] += gy[o * h * w..(o + 1) * h * w].iter().sum::<f64>();
                    }
                });
            }
            Op::MaxPoolSpatial { input, argmax } => {
                let area = self.value(*input).row_len();
                acc(*input, &mut |g| {
                    for (c, &i) in argmax.iter().enumerate() {
                        g[c * area + i] += gy[c];
                    }
                });
            }
            Op::BroadcastSpatial { input, area } => acc(*input, &mut |g| {
                for c in 0..g.len() {
                    g[c] += gy[c * area..(c + 1) * area].iter().sum::<f64>();
                }
            }),
            Op::Concat(parts) => {
                let mut off = 0;
                for p in parts {
                    let len = self.value(*p).len();
                    acc(*p, &mut |g| add_into(g, &gy[off..off + len]));
                    off += len;
                }
            }
            Op::Slice { input, start } => acc(*input, &mut |g| add_into(&mut g[*start..*start + gy.len()], gy)),
            Op::Stack(rows) => {
                let d = gy.len() / rows.len();
                for (i, r) in rows.iter().enumerate() {
                    acc(*r, &mut |g| add_into(g, &gy[i * d..(i + 1) * d]));
                }
            }
            Op::EmbedRows { table, indices } => {
                let d = self.value(*table).row_len();
                acc(*table, &mut |g| {
                    for (pos, &tok) in indices.iter().enumerate() {
                        add_into(&mut g[tok * d..(tok + 1) * d], &gy[pos * d..(pos + 1) * d]);
                    }
                });
            }
            Op::EmbedBagGrid { table, cells } => {
                let d = self.value(*table).row_len();
                let area = cells.len();
                acc(*table, &mut |g| {
                    for (cell, toks) in cells.iter().enumerate() {
                        for &tok in toks {
                            for k in 0..d {
                                g[tok * d + k] += gy[k * area + cell];
                            }
                        }
                    }
                });
            }
            Op::Sum(a) => acc(*a, &mut |g| g.iter_mut().for_each(|o| *o += gy[0])),
            Op::Entropy(p) => {
                let pv = &self.value(*p).data;
                acc(*p, &mut |g| {
                    for i in 0..g.len() {
                        if pv[i] > 0.0 {
                            g[i] -= gy[0] * (pv[i].ln() + 1.0);
                        }
                    }
                });
            }
            Op::Rms(a) => {
                let av = &self.value(*a).data;
                let r = y[0];
                let n = av.len() as f64;
                if r > 0.0 {
                    acc(*a, &mut |g| {
                        for i in 0..g.len() {
                            g[i] += gy[0] * av[i] / (n * r);
                        }
                    });
                }
            }
        }
    }
}

fn add_into(g: &mut [f64], d: &[f64]) {
    g.iter_mut().zip(d).for_each(|(o, v)| *o += v);
}

/// Visits every (output, input-channel, kernel-tap) triple that lands inside the
/// padded input, passing `(o, c, y, x, dy, dx, iy, ix)`.
#[allow(clippy::too_many_arguments)]
fn conv_each(
    cin: usize,
    h: usize,
    w: usize,
    cout: usize,
    k: usize,
    mut f: impl FnMut(usize, usize, usize, usize, usize, usize, usize, usize),
) {
    let pad = (k / 2) as isize;
    for o in 0..cout {
        for c in 0..cin {
            for y in 0..h {
                for x in 0..w {
                    for dy in 0..k {
                        let iy = y as isize + dy as isize - pad;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for dx in 0..k {
                            let ix = x as isize + dx as isize - pad;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            f(o, c, y, x, dy, dx, iy as usize, ix as usize);
                        }
                    }
                }
            }
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}
