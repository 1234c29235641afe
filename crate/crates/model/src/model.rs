//! The txt2π policy network.
//!
//! Goal and inventory are summarised by self-attention over BiLSTM states;
//! the document is encoded twice, once (with the goal encoder's weights)
//! for goal-conditioned attention and once by a separate encoder that each
//! FiLM² layer queries with the previous layer's visual summary. A stack of
//! FiLM² layers mixes these text features with the grid's bag-of-words
//! embeddings and positional features; two small MLPs read the final
//! summary to produce the policy and the baseline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::film2::{film2_forward, Film2Options, Film2Params};
use crate::graph::{Graph, Var};
use crate::layers::{attend, BiLstm, Conv, Linear, SelfAttention};
use crate::params::{Bound, ParamId, ParamStore};
use crate::tensor::Tensor;
use crate::ModelError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablations {
    /// Replace goal-conditioned document attention with self-attention.
    pub no_task_attn: bool,
    /// Replace the per-layer visual-summary attention with self-attention.
    pub no_vis_attn: bool,
    /// Remove the visual-to-text modulation branch of every FiLM² layer.
    pub no_text_mod: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub d_emb: usize,
    pub goal_hidden: usize,
    pub inv_hidden: usize,
    pub vis_doc_hidden: usize,
    /// Output channels of each FiLM² layer.
    pub channels: Vec<usize>,
    pub kernel: usize,
    /// `(from, to)` 1-based layer indices: `V(from)` is added to layer `to`'s output map.
    pub residual: Option<(usize, usize)>,
    pub out_dim: usize,
    pub mlp_hidden: usize,
    pub action_count: usize,
    pub goal_doc_shares_goal_weights: bool,
    pub ablations: Ablations,
}

impl ModelConfig {
    /// The published architecture: five FiLM² layers with 16/32/64/64/64
    /// channels, a 3 -> 5 skip, 30-d embeddings, 10-unit goal and inventory
    /// encoders and a 100-unit visual-document encoder.
    pub fn reference(vocab_size: usize, action_count: usize) -> Self {
        ModelConfig {
            vocab_size,
            d_emb: 30,
            goal_hidden: 10,
            inv_hidden: 10,
            vis_doc_hidden: 100,
            channels: vec![16, 32, 64, 64, 64],
            kernel: 3,
            residual: Some((3, 5)),
            out_dim: 64,
            mlp_hidden: 64,
            action_count,
            goal_doc_shares_goal_weights: true,
            ablations: Ablations::default(),
        }
    }

    /// Two-layer network small enough for exhaustive finite differences.
    pub fn tiny(vocab_size: usize, action_count: usize) -> Self {
        ModelConfig {
            vocab_size,
            d_emb: 4,
            goal_hidden: 3,
            inv_hidden: 2,
            vis_doc_hidden: 3,
            channels: vec![3, 4],
            kernel: 3,
            residual: None,
            out_dim: 5,
            mlp_hidden: 4,
            action_count,
            goal_doc_shares_goal_weights: true,
            ablations: Ablations::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let dims = [
            self.vocab_size,
            self.d_emb,
            self.goal_hidden,
            self.inv_hidden,
            self.vis_doc_hidden,
            self.out_dim,
            self.mlp_hidden,
            self.action_count,
            self.kernel,
        ];
        if dims.contains(&0) || self.channels.is_empty() || self.channels.contains(&0) {
            return Err(ModelError::InvalidConfig("all dimensions must be positive".into()));
        }
        if self.kernel.is_multiple_of(2) {
            return Err(ModelError::InvalidConfig("kernel size must be odd".into()));
        }
        if let Some((from, to)) = self.residual {
            if from == 0 || from >= to || to > self.channels.len() {
                return Err(ModelError::InvalidConfig(format!(
                    "residual {from}->{to} outside 1..={}",
                    self.channels.len()
                )));
            }
        }
        Ok(())
    }

    pub fn n_layers(&self) -> usize {
        self.channels.len()
    }

    /// Width of the concatenated text features fed to every FiLM² layer.
    pub fn text_dim(&self) -> usize {
        2 * (2 * self.goal_hidden + self.inv_hidden + self.vis_doc_hidden)
    }
}

/// Parameter handles of the whole network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Txt2PiLayout {
    pub embedding: ParamId,
    pub goal_lstm: BiLstm,
    pub inv_lstm: BiLstm,
    /// Same handles as `goal_lstm` when weights are shared.
    pub goal_doc_lstm: BiLstm,
    pub vis_doc_lstm: BiLstm,
    pub goal_attn: SelfAttention,
    pub inv_attn: SelfAttention,
    pub doc_self_attn: Option<SelfAttention>,
    pub vis_doc_self_attn: Option<SelfAttention>,
    /// `W_ini, b_ini` as a 1x1 convolution.
    pub init_proj: Conv,
    /// Projects `s(i-1)` to the visual-document encoder width for layers 2..n.
    pub query_proj: Vec<Option<Linear>>,
    pub layers: Vec<Film2Params>,
    pub residual_proj: Option<Conv>,
    /// `W_o, b_o`.
    pub out: Linear,
    pub policy: [Linear; 2],
    pub baseline: [Linear; 2],
}

/// Token-index view of one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsInput {
    pub width: usize,
    pub height: usize,
    /// `(x, y)` of the agent.
    pub agent: (usize, usize),
    /// Tokens of cell `(x, y)` at index `y * width + x`.
    pub cells: Vec<Vec<usize>>,
    pub goal: Vec<usize>,
    pub inventory: Vec<usize>,
    pub document: Vec<usize>,
}

/// Per-layer values recorded by a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    pub v: Tensor,
    pub s: Tensor,
    pub text_features: Tensor,
    pub vis_doc_attention: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub y_policy: Vec<f64>,
    pub y_baseline: f64,
    pub v0: Tensor,
    pub s0: Tensor,
    pub layers: Vec<LayerTrace>,
    pub h_goal: Tensor,
    pub h_inv: Tensor,
    pub h_doc: Tensor,
    pub h_vis_doc: Tensor,
    pub c_goal: Tensor,
    pub c_inv: Tensor,
    pub c_doc: Tensor,
    pub goal_attention: Tensor,
    pub inv_attention: Tensor,
    pub doc_attention: Tensor,
    pub o: Tensor,
}

/// Graph handles of a forward pass, for building losses.
#[derive(Debug, Clone)]
pub struct ForwardVars {
    pub policy: Var,
    pub baseline: Var,
    pub v0: Var,
    pub s0: Var,
    pub layers: Vec<(Var, Var, Var, Var)>,
    pub h_goal: Var,
    pub h_inv: Var,
    pub h_doc: Var,
    pub h_vis_doc: Var,
    pub c_goal: Var,
    pub c_inv: Var,
    pub c_doc: Var,
    pub goal_attention: Var,
    pub inv_attention: Var,
    pub doc_attention: Var,
    pub o: Var,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Txt2Pi {
    pub config: ModelConfig,
    pub layout: Txt2PiLayout,
    pub params: ParamStore,
}

/// Signed displacement of every cell from the agent, scaled by the grid size.
/// Channel 0 is `(x - x_agent) / width`, channel 1 `(y - y_agent) / height`.
pub fn positional_features(agent: (usize, usize), width: usize, height: usize) -> Tensor {
    let area = width * height;
    let mut data = vec![0.0; 2 * area];
    for y in 0..height {
        for x in 0..width {
            data[y * width + x] = (x as f64 - agent.0 as f64) / width as f64;
            data[area + y * width + x] = (y as f64 - agent.1 as f64) / height as f64;
        }
    }
    Tensor {
        shape: vec![2, height, width],
        data,
    }
}

impl Txt2Pi {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let c = &config;
        let embedding = store.add_uniform("embedding", &[c.vocab_size, c.d_emb], 1, &mut rng);
        let goal_lstm = BiLstm::init(&mut store, "goal_lstm", c.d_emb, c.goal_hidden, &mut rng);
        let inv_lstm = BiLstm::init(&mut store, "inv_lstm", c.d_emb, c.inv_hidden, &mut rng);
        let goal_doc_lstm = if c.goal_doc_shares_goal_weights {
            goal_lstm
        } else {
            BiLstm::init(&mut store, "goal_doc_lstm", c.d_emb, c.goal_hidden, &mut rng)
        };
        let vis_doc_lstm = BiLstm::init(&mut store, "vis_doc_lstm", c.d_emb, c.vis_doc_hidden, &mut rng);
        let goal_attn = SelfAttention::init(&mut store, "goal_attn", 2 * c.goal_hidden, &mut rng);
        let inv_attn = SelfAttention::init(&mut store, "inv_attn", 2 * c.inv_hidden, &mut rng);
        let doc_self_attn = c
            .ablations
            .no_task_attn
            .then(|| SelfAttention::init(&mut store, "doc_self_attn", 2 * c.goal_hidden, &mut rng));
        let vis_doc_self_attn = c
            .ablations
            .no_vis_attn
            .then(|| SelfAttention::init(&mut store, "vis_doc_self_attn", 2 * c.vis_doc_hidden, &mut rng));
        let init_proj = Conv::init(&mut store, "init_proj", c.d_emb + 2, 2 * c.vis_doc_hidden, 1, &mut rng);

        let text_dim = c.text_dim();
        let mut layers = Vec::new();
        let mut query_proj = Vec::new();
        let mut in_channels = c.d_emb + 2;
        for (i, &out) in c.channels.iter().enumerate() {
            let q = (i > 0 && !c.ablations.no_vis_attn).then(|| {
                Linear::init(
                    &mut store,
                    &format!("layer{}.query_proj", i + 1),
                    in_channels,
                    2 * c.vis_doc_hidden,
                    &mut rng,
                )
            });
            query_proj.push(q);
            layers.push(Film2Params::init(
                &mut store,
                &format!("layer{}", i + 1),
                in_channels + 2,
                text_dim,
                out,
                c.kernel,
                &mut rng,
            ));
            in_channels = out;
        }
        let residual_proj = match c.residual {
            Some((from, to)) if c.channels[from - 1] != c.channels[to - 1] => Some(Conv::init(
                &mut store,
                "residual_proj",
                c.channels[from - 1],
                c.channels[to - 1],
                1,
                &mut rng,
            )),
            _ => None,
        };
        let last = *c.channels.last().expect("validated non-empty");
        let out = Linear::init(&mut store, "out", last, c.out_dim, &mut rng);
        let policy = [
            Linear::init(&mut store, "policy.0", c.out_dim, c.mlp_hidden, &mut rng),
            Linear::init(&mut store, "policy.1", c.mlp_hidden, c.action_count, &mut rng),
        ];
        let baseline = [
            Linear::init(&mut store, "baseline.0", c.out_dim, c.mlp_hidden, &mut rng),
            Linear::init(&mut store, "baseline.1", c.mlp_hidden, 1, &mut rng),
        ];
        let layout = Txt2PiLayout {
            embedding,
            goal_lstm,
            inv_lstm,
            goal_doc_lstm,
            vis_doc_lstm,
            goal_attn,
            inv_attn,
            doc_self_attn,
            vis_doc_self_attn,
            init_proj,
            query_proj,
            layers,
            residual_proj,
            out,
            policy,
            baseline,
        };
        Ok(Txt2Pi {
            config,
            layout,
            params: store,
        })
    }

    fn check_input(&self, input: &ObsInput) -> Result<(), ModelError> {
        let (w, h) = (input.width, input.height);
        if w == 0 || h == 0 || input.cells.len() != w * h {
            return Err(ModelError::ShapeMismatch(format!(
                "{} cells for a {w}x{h} grid",
                input.cells.len()
            )));
        }
        if input.agent.0 >= w || input.agent.1 >= h {
            return Err(ModelError::ShapeMismatch(format!(
                "agent {:?} outside grid",
                input.agent
            )));
        }
        for (name, seq) in [
            ("goal", &input.goal),
            ("inventory", &input.inventory),
            ("document", &input.document),
        ] {
            if seq.is_empty() {
                return Err(ModelError::ShapeMismatch(format!("empty {name} sequence")));
            }
        }
        let all = input
            .cells
            .iter()
            .flatten()
            .chain(&input.goal)
            .chain(&input.inventory)
            .chain(&input.document);
        if let Some(&bad) = all.into_iter().find(|&&t| t >= self.config.vocab_size) {
            return Err(ModelError::UnknownToken(bad));
        }
        Ok(())
    }

    /// Builds the forward computation on `g` using parameters bound as `p`.
    pub fn forward_graph(&self, g: &mut Graph, p: &Bound, input: &ObsInput) -> Result<ForwardVars, ModelError> {
        self.check_input(input)?;
        let l = &self.layout;
        let ab = self.config.ablations;
        let emb = p[l.embedding];

        let e_goal = g.embed_rows(emb, &input.goal)?;
        let h_goal = l.goal_lstm.encode(g, p, e_goal)?;
        let (c_goal, goal_attention) = l.goal_attn.forward(g, p, h_goal)?;

        let e_inv = g.embed_rows(emb, &input.inventory)?;
        let h_inv = l.inv_lstm.encode(g, p, e_inv)?;
        let (c_inv, inv_attention) = l.inv_attn.forward(g, p, h_inv)?;

        let e_doc = g.embed_rows(emb, &input.document)?;
        let h_doc = l.goal_doc_lstm.encode(g, p, e_doc)?;
        let (c_doc, doc_attention) = match &l.doc_self_attn {
            Some(sa) if ab.no_task_attn => sa.forward(g, p, h_doc)?,
            _ => attend(g, h_doc, c_goal)?,
        };
        let h_vis_doc = l.vis_doc_lstm.encode(g, p, e_doc)?;

        let (w, h) = (input.width, input.height);
        let x_pos = g.leaf(positional_features(input.agent, w, h));
        let bag = g.embed_bag_grid(emb, &input.cells, h, w)?;
        let v0 = g.concat(&[bag, x_pos])?;
        let projected = l.init_proj.forward(g, p, v0)?;
        let s0 = g.maxpool_spatial(projected)?;

        let mut prev_v = v0;
        let mut prev_s = s0;
        let mut outputs: Vec<Var> = Vec::new();
        let mut layers = Vec::new();
        for (i, film) in l.layers.iter().enumerate() {
            let r = g.concat(&[prev_v, x_pos])?;
            let (c_vis, vis_weights) = match &l.vis_doc_self_attn {
                Some(sa) if ab.no_vis_attn => sa.forward(g, p, h_vis_doc)?,
                _ => {
                    let query = match &l.query_proj[i] {
                        Some(q) => q.forward(g, p, prev_s)?,
                        None => prev_s,
                    };
                    attend(g, h_vis_doc, query)?
                }
            };
            let t = g.concat(&[c_goal, c_inv, c_doc, c_vis])?;
            let residual = match self.config.residual {
                Some((from, to)) if to == i + 1 => {
                    let src = outputs[from - 1];
                    Some(match &l.residual_proj {
                        Some(proj) => proj.forward(g, p, src)?,
                        None => src,
                    })
                }
                _ => None,
            };
            let out = film2_forward(
                g,
                p,
                film,
                r,
                t,
                Film2Options {
                    no_text_mod: ab.no_text_mod,
                    residual,
                },
            )?;
            outputs.push(out.v);
            layers.push((out.v, out.s, t, vis_weights));
            prev_v = out.v;
            prev_s = out.s;
        }

        let o = l.out.forward(g, p, prev_s)?;
        let o = g.relu(o);
        let hp = l.policy[0].forward(g, p, o)?;
        let hp = g.relu(hp);
        let logits = l.policy[1].forward(g, p, hp)?;
        let policy = g.softmax(logits)?;
        let hb = l.baseline[0].forward(g, p, o)?;
        let hb = g.relu(hb);
        let baseline = l.baseline[1].forward(g, p, hb)?;

        Ok(ForwardVars {
            policy,
            baseline,
            v0,
            s0,
            layers,
            h_goal,
            h_inv,
            h_doc,
            h_vis_doc,
            c_goal,
            c_inv,
            c_doc,
            goal_attention,
            inv_attention,
            doc_attention,
            o,
        })
    }

    pub fn forward(&self, input: &ObsInput) -> Result<PolicyOutput, ModelError> {
        let mut g = Graph::new();
        let p = self.params.bind(&mut g);
        let fv = self.forward_graph(&mut g, &p, input)?;
        let val = |v: Var| g.value(v).clone();
        Ok(PolicyOutput {
            y_policy: g.value(fv.policy).data.clone(),
            y_baseline: g.value(fv.baseline).item(),
            v0: val(fv.v0),
            s0: val(fv.s0),
            layers: fv
                .layers
                .iter()
                .map(|&(v, s, t, a)| LayerTrace {
                    v: val(v),
                    s: val(s),
                    text_features: val(t),
                    vis_doc_attention: val(a),
                })
                .collect(),
            h_goal: val(fv.h_goal),
            h_inv: val(fv.h_inv),
            h_doc: val(fv.h_doc),
            h_vis_doc: val(fv.h_vis_doc),
            c_goal: val(fv.c_goal),
            c_inv: val(fv.c_inv),
            c_doc: val(fv.c_doc),
            goal_attention: val(fv.goal_attention),
            inv_attention: val(fv.inv_attention),
            doc_attention: val(fv.doc_attention),
            o: val(fv.o),
        })
    }

    /// Entropy of the policy plus the RMS of `(target - baseline)`, with its
    /// gradient flattened in parameter order.
    pub fn loss_and_gradient(&self, input: &ObsInput, target: f64) -> Result<(f64, Vec<f64>), ModelError> {
        self.loss_and_gradient_with(&self.params, input, target)
    }

    pub fn loss_and_gradient_with(
        &self,
        params: &ParamStore,
        input: &ObsInput,
        target: f64,
    ) -> Result<(f64, Vec<f64>), ModelError> {
        let mut g = Graph::new();
        let p = params.bind(&mut g);
        let fv = self.forward_graph(&mut g, &p, input)?;
        let ent = g.entropy(fv.policy);
        let tgt = g.leaf(Tensor::scalar(target));
        let adv = g.sub(tgt, fv.baseline)?;
        let base = g.rms(adv)?;
        let loss = g.add(ent, base)?;
        let grads = g.backward(loss)?;
        Ok((g.value(loss).item(), params.flat_gradient(&p, &grads)))
    }

    pub fn param(&self, id: ParamId) -> &Tensor {
        self.params.get(id)
    }
}
