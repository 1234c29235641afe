//! Central-difference verification of reverse-mode gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::film2::{film2_forward, Film2Options, Film2Params};
use crate::graph::Graph;
use crate::model::{ModelConfig, ObsInput, Txt2Pi};
use crate::params::ParamStore;
use crate::tensor::Tensor;
use crate::ModelError;

/// Denominator floor so that gradients which are zero on both routes count as agreeing.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub parameters: usize,
    pub epsilon: f64,
}

/// `|a - n| / max(|a|, |n|, RELATIVE_ERROR_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR);
    (analytic - numeric).abs() / denom
}

/// Compares the gradient returned by `f` at `theta` with
/// `(f(theta + eps e_i) - f(theta - eps e_i)) / 2 eps` for every coordinate.
pub fn grad_check<F>(f: F, theta: &[f64], eps: f64) -> GradCheckReport
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (_, analytic) = f(theta);
    assert_eq!(analytic.len(), theta.len(), "gradient length");
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        parameters: theta.len(),
        epsilon: eps,
    };
    let mut probe = theta.to_vec();
    for i in 0..theta.len() {
        probe[i] = theta[i] + eps;
        let plus = f(&probe).0;
        probe[i] = theta[i] - eps;
        let minus = f(&probe).0;
        probe[i] = theta[i];
        let numeric = (plus - minus) / (2.0 * eps);
        let err = relative_error(analytic[i], numeric);
        if err > report.max_relative_error || i == 0 {
            report.max_relative_error = err;
            report.worst_index = i;
            report.analytic = analytic[i];
            report.numeric = numeric;
        }
    }
    report
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor {
        shape: shape.to_vec(),
        data: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    }
}

/// A single FiLM² layer (3 channels in and out, 3x3 grid, 4-d text) under
/// the loss `sum(V) + sum(s)`.
pub fn film2_gradcheck(seed: u64, eps: f64) -> Result<GradCheckReport, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let layer = Film2Params::init(&mut store, "film", 3, 4, 3, 3, &mut rng);
    let x_vis = random_tensor(&[3, 3, 3], &mut rng);
    let x_text = random_tensor(&[4], &mut rng);
    let eval = |flat: &[f64]| -> (f64, Vec<f64>) {
        let mut params = store.clone();
        params.set_flat(flat).expect("flat length");
        let mut g = Graph::new();
        let p = params.bind(&mut g);
        let xv = g.leaf(x_vis.clone());
        let xt = g.leaf(x_text.clone());
        let out = film2_forward(&mut g, &p, &layer, xv, xt, Film2Options::default()).expect("shapes");
        let sv = g.sum(out.v);
        let ss = g.sum(out.s);
        let loss = g.add(sv, ss).expect("scalars");
        let grads = g.backward(loss).expect("scalar loss");
        (g.value(loss).item(), params.flat_gradient(&p, &grads))
    };
    Ok(grad_check(eval, &store.flatten(), eps))
}

/// A deterministic 3x3 observation over a 12-token vocabulary.
pub fn tiny_input() -> ObsInput {
    ObsInput {
        width: 3,
        height: 3,
        agent: (1, 1),
        cells: vec![
            vec![1],
            vec![2, 3],
            vec![1],
            vec![4],
            vec![5],
            vec![1],
            vec![6, 7],
            vec![1],
            vec![1],
        ],
        goal: vec![8, 9, 10],
        inventory: vec![11],
        document: vec![9, 2, 3, 8, 6, 7, 10],
    }
}

/// Two-layer txt2π with 4-d embeddings on a 3x3 grid; loss is the policy
/// entropy plus the baseline RMS term.
pub fn txt2pi_gradcheck(seed: u64, eps: f64) -> Result<GradCheckReport, ModelError> {
    let model = Txt2Pi::new(ModelConfig::tiny(12, 5), seed)?;
    let input = tiny_input();
    let eval = |flat: &[f64]| -> (f64, Vec<f64>) {
        let mut params = model.params.clone();
        params.set_flat(flat).expect("flat length");
        model
            .loss_and_gradient_with(&params, &input, 0.7)
            .expect("tiny model forward")
    };
    Ok(grad_check(eval, &model.params.flatten(), eps))
}
