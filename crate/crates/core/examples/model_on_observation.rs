//! Encodes a real observation into token ids and runs the untrained policy
//! network on it.

use rtfm::encode::{encode_observation, observation_vocab};
use rtfm::engine::{Action, Environment};
use rtfm::worldgen::Preset;
use txt2pi::model::{ModelConfig, Txt2Pi};

pub fn run_example() -> rtfm::Result<()> {
    let env = Environment::new(Preset::Full6.config())?;
    let vocab = observation_vocab(&env.catalog, &env.pack);
    let obs = env.reset(0)?.render_observation();
    let input = encode_observation(&obs, &vocab)?;
    println!(
        "vocabulary {} words, document {} tokens",
        vocab.len(),
        input.document.len()
    );
    let model = Txt2Pi::new(ModelConfig::reference(vocab.len(), Action::ALL.len()), 0)?;
    let out = model.forward(&input)?;
    for (a, p) in Action::ALL.iter().zip(&out.y_policy) {
        println!("{a:<5} {p:.4}");
    }
    println!("baseline {:.4}", out.y_baseline);
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
