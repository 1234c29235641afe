//! Forward pass of the reference-size network on a toy observation,
//! printing the policy, the baseline and the attention over the document.

use txt2pi::{Checkpoint, ModelConfig, ModelError, ObsInput, Txt2Pi};

pub fn run_example() -> Result<(), ModelError> {
    let model = Txt2Pi::new(ModelConfig::reference(24, 5), 0)?;
    let (w, h) = (6, 6);
    let input = ObsInput {
        width: w,
        height: h,
        agent: (2, 3),
        cells: (0..w * h).map(|i| vec![i % 24]).collect(),
        goal: vec![1, 2, 3],
        inventory: vec![4],
        document: vec![5, 6, 7, 8, 9, 10, 11, 12],
    };
    let out = model.forward(&input)?;
    println!("parameters: {}", model.params.numel());
    println!("policy: {:.4?}", out.y_policy);
    println!("baseline: {:.4}", out.y_baseline);
    println!("goal-conditioned document attention: {:.3?}", out.doc_attention.data);
    for (i, layer) in out.layers.iter().enumerate() {
        println!(
            "layer {}: V {:?}, max s {:.4}",
            i + 1,
            layer.v.shape,
            layer.s.data.iter().cloned().fold(f64::MIN, f64::max)
        );
    }
    let json = Checkpoint::from_store(&model.params).to_json();
    println!("checkpoint: {} bytes of JSON", json.len());
    Ok(())
}

fn main() -> Result<(), ModelError> {
    run_example()
}
