use txt2pi::gradcheck::{film2_gradcheck, tiny_input, txt2pi_gradcheck};
use txt2pi::{grad_check, Ablations, ModelConfig, Txt2Pi};

const EPS: f64 = 1e-5;
const TOL: f64 = 1e-4;

#[test]
fn film2_layer_gradients() {
    for seed in 0..3 {
        let r = film2_gradcheck(seed, EPS).unwrap();
        assert!(r.max_relative_error < TOL, "seed {seed}: {r:?}");
        assert!(r.parameters > 0);
    }
}

#[test]
fn tiny_txt2pi_gradients() {
    let r = txt2pi_gradcheck(0, EPS).unwrap();
    assert!(r.max_relative_error < TOL, "{r:?}");
}

#[test]
fn ablated_variants_have_correct_gradients() {
    let variants = [
        Ablations {
            no_task_attn: true,
            ..Default::default()
        },
        Ablations {
            no_vis_attn: true,
            ..Default::default()
        },
        Ablations {
            no_text_mod: true,
            ..Default::default()
        },
    ];
    let input = tiny_input();
    for ab in variants {
        let mut config = ModelConfig::tiny(12, 5);
        config.ablations = ab;
        let model = Txt2Pi::new(config, 4).unwrap();
        let eval = |flat: &[f64]| {
            let mut params = model.params.clone();
            params.set_flat(flat).unwrap();
            model.loss_and_gradient_with(&params, &input, -0.3).unwrap()
        };
        let r = grad_check(eval, &model.params.flatten(), EPS);
        assert!(r.max_relative_error < TOL, "{ab:?}: {r:?}");
    }
}

#[test]
fn residual_and_unshared_variants_have_correct_gradients() {
    let mut config = ModelConfig::tiny(12, 5);
    config.channels = vec![2, 3, 3];
    config.residual = Some((1, 3));
    config.goal_doc_shares_goal_weights = false;
    let model = Txt2Pi::new(config, 9).unwrap();
    let input = tiny_input();
    let eval = |flat: &[f64]| {
        let mut params = model.params.clone();
        params.set_flat(flat).unwrap();
        model.loss_and_gradient_with(&params, &input, 0.1).unwrap()
    };
    let r = grad_check(eval, &model.params.flatten(), EPS);
    assert!(r.max_relative_error < TOL, "{r:?}");
}
