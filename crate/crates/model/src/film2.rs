//! Bidirectional feature-wise linear modulation.
//!
//! Text features modulate the convolved visual map (per-channel scale and
//! shift), and visual maps modulate a projection of the text features
//! (per-cell scale and shift). The layer outputs the sum of both branches
//! and its spatial max-pool:
//!
//! ```text
//! gamma_t = W_g x + b_g            beta_t = W_b x + b_b
//! V_vis   = ReLU((1 + gamma_t) * Conv_vis(X) + beta_t)
//! Gamma_v = Conv_g(X)              Beta_v = Conv_b(X)
//! V_text  = ReLU((1 + Gamma_v) * (W_t x + b_t) + Beta_v)
//! V = V_vis + V_text               s = MaxPool(V)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, Var};
use crate::layers::{Conv, Linear};
use crate::params::{Bound, ParamStore};
use crate::ModelError;

/// Learnable tensors of one FiLM² layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Film2Params {
    /// `W_gamma, b_gamma`: text to per-channel visual scale.
    pub gamma_text: Linear,
    /// `W_beta, b_beta`: text to per-channel visual shift.
    pub beta_text: Linear,
    pub conv_vis: Conv,
    /// `Conv_gamma`: visual map to per-cell text scale.
    pub conv_gamma: Conv,
    /// `Conv_beta`: visual map to per-cell text shift.
    pub conv_beta: Conv,
    /// `W_text, b_text`: text projection modulated by the visual maps.
    pub text: Linear,
    pub in_channels: usize,
    pub out_channels: usize,
    pub text_dim: usize,
}

impl Film2Params {
    pub fn init(
        store: &mut ParamStore,
        name: &str,
        in_channels: usize,
        text_dim: usize,
        out_channels: usize,
        kernel: usize,
        rng: &mut impl Rng,
    ) -> Self {
        Film2Params {
            gamma_text: Linear::init(store, &format!("{name}.gamma_text"), text_dim, out_channels, rng),
            beta_text: Linear::init(store, &format!("{name}.beta_text"), text_dim, out_channels, rng),
            conv_vis: Conv::init(
                store,
                &format!("{name}.conv_vis"),
                in_channels,
                out_channels,
                kernel,
                rng,
            ),
            conv_gamma: Conv::init(
                store,
                &format!("{name}.conv_gamma"),
                in_channels,
                out_channels,
                kernel,
                rng,
            ),
            conv_beta: Conv::init(
                store,
                &format!("{name}.conv_beta"),
                in_channels,
                out_channels,
                kernel,
                rng,
            ),
            text: Linear::init(store, &format!("{name}.text"), text_dim, out_channels, rng),
            in_channels,
            out_channels,
            text_dim,
        }
    }
}

/// Graph handles for one FiLM² evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Film2Vars {
    pub gamma_text: Var,
    pub beta_text: Var,
    pub v_vis: Var,
    pub gamma_vis: Option<Var>,
    pub beta_vis: Option<Var>,
    pub v_text: Option<Var>,
    pub v: Var,
    pub s: Var,
}

/// Options that alter the layer without changing its parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct Film2Options {
    /// Drop the visual-to-text branch (`V = V_vis`).
    pub no_text_mod: bool,
    /// Map added to `V` before pooling (skip connection from an earlier layer).
    pub residual: Option<Var>,
}

/// `x_vis: [C_in, H, W]`, `x_text: [d_text]`.
pub fn film2_forward(
    g: &mut Graph,
    p: &Bound,
    params: &Film2Params,
    x_vis: Var,
    x_text: Var,
    opts: Film2Options,
) -> Result<Film2Vars, ModelError> {
    let vis_shape = g.shape(x_vis).to_vec();
    if vis_shape.len() != 3 || vis_shape[0] != params.in_channels {
        return Err(ModelError::ShapeMismatch(format!(
            "film2 visual input {vis_shape:?}, expected {} channels",
            params.in_channels
        )));
    }
    if g.shape(x_text) != [params.text_dim] {
        return Err(ModelError::ShapeMismatch(format!(
            "film2 text input {:?}, expected [{}]",
            g.shape(x_text),
            params.text_dim
        )));
    }
    let (h, w) = (vis_shape[1], vis_shape[2]);

    let gamma_text = params.gamma_text.forward(g, p, x_text)?;
    let beta_text = params.beta_text.forward(g, p, x_text)?;
    let conv = params.conv_vis.forward(g, p, x_vis)?;
    let scale = g.add_const(gamma_text, 1.0);
    let scale = g.broadcast_spatial(scale, h, w)?;
    let shift = g.broadcast_spatial(beta_text, h, w)?;
    let modulated = g.mul(scale, conv)?;
    let modulated = g.add(modulated, shift)?;
    let v_vis = g.relu(modulated);

    let (mut v, gamma_vis, beta_vis, v_text) = if opts.no_text_mod {
        (v_vis, None, None, None)
    } else {
        let gamma_vis = params.conv_gamma.forward(g, p, x_vis)?;
        let beta_vis = params.conv_beta.forward(g, p, x_vis)?;
        let text = params.text.forward(g, p, x_text)?;
        let text = g.broadcast_spatial(text, h, w)?;
        let scale = g.add_const(gamma_vis, 1.0);
        let t = g.mul(scale, text)?;
        let t = g.add(t, beta_vis)?;
        let v_text = g.relu(t);
        let v = g.add(v_vis, v_text)?;
        (v, Some(gamma_vis), Some(beta_vis), Some(v_text))
    };
    if let Some(res) = opts.residual {
        v = g.add(v, res)?;
    }
    let s = g.maxpool_spatial(v)?;
    Ok(Film2Vars {
        gamma_text,
        beta_text,
        v_vis,
        gamma_vis,
        beta_vis,
        v_text,
        v,
        s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layer(in_ch: usize, text: usize, out: usize) -> (ParamStore, Film2Params) {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = Film2Params::init(&mut store, "film", in_ch, text, out, 3, &mut rng);
        (store, p)
    }

    fn zero(store: &mut ParamStore, ids: &[crate::params::ParamId]) {
        for id in ids {
            let t = store.get_mut(*id);
            t.data.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    fn run(store: &ParamStore, p: &Film2Params, x: &Tensor, t: &Tensor, opts_no_text: bool) -> (Tensor, Tensor) {
        let mut g = Graph::new();
        let b = store.bind(&mut g);
        let xv = g.leaf(x.clone());
        let tv = g.leaf(t.clone());
        let out = film2_forward(
            &mut g,
            &b,
            p,
            xv,
            tv,
            Film2Options {
                no_text_mod: opts_no_text,
                residual: None,
            },
        )
        .unwrap();
        (g.value(out.v).clone(), g.value(out.s).clone())
    }

    fn input(c: usize, h: usize, w: usize) -> Tensor {
        Tensor::new(
            vec![c, h, w],
            (0..c * h * w).map(|i| ((i * 37) % 11) as f64 / 5.0 - 1.0).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let (mut store, p) = layer(3, 4, 5);
        let all: Vec<_> = store.iter().map(|(id, _, _)| id).collect();
        zero(&mut store, &all);
        let (v, s) = run(
            &store,
            &p,
            &input(3, 4, 4),
            &Tensor::vector(vec![0.3, -1.0, 2.0, 0.5]),
            false,
        );
        assert!(v.data.iter().all(|&x| x == 0.0));
        assert!(s.data.iter().all(|&x| x == 0.0));
        assert_eq!(v.shape, vec![5, 4, 4]);
        assert_eq!(s.shape, vec![5]);
    }

    #[test]
    fn zero_modulation_reduces_to_relu_conv() {
        let (mut store, p) = layer(2, 3, 4);
        zero(
            &mut store,
            &[
                p.gamma_text.weight,
                p.gamma_text.bias,
                p.beta_text.weight,
                p.beta_text.bias,
                p.text.weight,
                p.text.bias,
                p.conv_gamma.kernel,
                p.conv_gamma.bias,
                p.conv_beta.kernel,
                p.conv_beta.bias,
            ],
        );
        let x = input(2, 3, 3);
        let (v, _) = run(&store, &p, &x, &Tensor::vector(vec![1.0, 2.0, -3.0]), false);
        let mut g = Graph::new();
        let b = store.bind(&mut g);
        let xv = g.leaf(x);
        let conv = p.conv_vis.forward(&mut g, &b, xv).unwrap();
        let expected = g.relu(conv);
        assert_eq!(&v, g.value(expected));
    }

    #[test]
    fn no_text_mod_matches_zeroed_text_branch() {
        let (store, p) = layer(2, 3, 4);
        let x = input(2, 3, 3);
        let t = Tensor::vector(vec![0.2, -0.4, 0.9]);
        let (ablated, _) = run(&store, &p, &x, &t, true);
        let mut zeroed = store.clone();
        zero(
            &mut zeroed,
            &[
                p.text.weight,
                p.text.bias,
                p.conv_gamma.kernel,
                p.conv_gamma.bias,
                p.conv_beta.kernel,
                p.conv_beta.bias,
            ],
        );
        let (reference, _) = run(&zeroed, &p, &x, &t, false);
        assert_eq!(ablated, reference);
    }

    /// 1x1 grid, one channel, scalar text: only the centre tap of each 3x3
    /// kernel sees the input.
    #[test]
    fn scalar_trace() {
        let (mut store, p) = layer(1, 1, 1);
        let set = |store: &mut ParamStore, id, v: f64| store.get_mut(id).data.iter_mut().for_each(|x| *x = v);
        set(&mut store, p.gamma_text.weight, 0.5);
        set(&mut store, p.gamma_text.bias, 0.1);
        set(&mut store, p.beta_text.weight, -0.2);
        set(&mut store, p.beta_text.bias, 0.3);
        set(&mut store, p.conv_vis.kernel, 0.0);
        store.get_mut(p.conv_vis.kernel).data[4] = 2.0;
        set(&mut store, p.conv_vis.bias, -0.5);
        set(&mut store, p.conv_gamma.kernel, 0.0);
        store.get_mut(p.conv_gamma.kernel).data[4] = 0.25;
        set(&mut store, p.conv_gamma.bias, 0.05);
        set(&mut store, p.conv_beta.kernel, 0.0);
        store.get_mut(p.conv_beta.kernel).data[4] = -1.0;
        set(&mut store, p.conv_beta.bias, 0.4);
        set(&mut store, p.text.weight, 1.5);
        set(&mut store, p.text.bias, -0.1);
        let (xv, xt) = (0.8_f64, 1.2_f64);
        let (v, s) = run(
            &store,
            &p,
            &Tensor::new(vec![1, 1, 1], vec![xv]).unwrap(),
            &Tensor::vector(vec![xt]),
            false,
        );
        // gamma_t = 0.7, beta_t = 0.06, conv = 1.1 -> V_vis = relu(1.7*1.1 + 0.06) = 1.93
        // Gamma_v = 0.25, Beta_v = -0.4, text = 1.7 -> V_text = relu(1.25*1.7 - 0.4) = 1.725
        let expected = 1.93 + 1.725;
        assert!((v.data[0] - expected).abs() < 1e-12, "{}", v.data[0]);
        assert!((s.data[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn output_shape_follows_conv_channels() {
        let (store, p) = layer(3, 2, 7);
        let (v, s) = run(&store, &p, &input(3, 5, 2), &Tensor::vector(vec![1.0, 0.0]), false);
        assert_eq!(v.shape, vec![7, 5, 2]);
        assert_eq!(s.len(), 7);
    }

    #[test]
    fn wrong_input_shapes_are_rejected() {
        let (store, p) = layer(3, 2, 4);
        let mut g = Graph::new();
        let b = store.bind(&mut g);
        let x = g.leaf(input(2, 3, 3));
        let t = g.leaf(Tensor::vector(vec![1.0, 0.0]));
        assert!(film2_forward(&mut g, &b, &p, x, t, Film2Options::default()).is_err());
        let x = g.leaf(input(3, 3, 3));
        let t = g.leaf(Tensor::vector(vec![1.0]));
        assert!(film2_forward(&mut g, &b, &p, x, t, Film2Options::default()).is_err());
    }
}
