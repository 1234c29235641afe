//! Renders sampled dynamics as a goal and document, then recovers the
//! dynamics by parsing the text back.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rtfm::nlgen::{extract_assignment, render_texts, TemplatePack};
use rtfm::worldgen::{load_catalog, sample_dynamics, split_assignments, Preset};

pub fn run_example() -> rtfm::Result<()> {
    let catalog = load_catalog();
    let pack = TemplatePack::standard();
    let config = Preset::Full10.config();
    let (train, _) = split_assignments(&catalog, config.eval_fraction, config.split_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dynamics = sample_dynamics(&mut rng, &config, &catalog, &train)?;
    for nl in [false, true] {
        let texts = render_texts(&dynamics, &mut rng, nl, &pack);
        println!("goal: {}\ndocument: {}", texts.goal, texts.document.text);
        let parsed = extract_assignment(&texts.document.text, &texts.goal, &catalog, &pack)?;
        println!("recovered exactly: {}\n", parsed.matches(&dynamics));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
