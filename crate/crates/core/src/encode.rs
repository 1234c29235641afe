//! Token-id encoding of observations for the policy network.

use txt2pi::model::ObsInput;

use crate::engine::{Observation, AGENT, EMPTY, WALL};
use crate::error::{Error, Result};
use crate::nlgen::{TemplatePack, Vocab};
use crate::rps::{FULL_ALPHABET, RPS_GOAL};
use crate::worldgen::EntityCatalog;

/// Vocabulary covering every word an observation can contain.
pub fn observation_vocab(catalog: &EntityCatalog, pack: &TemplatePack) -> Vocab {
    let alphabet: String = FULL_ALPHABET.chars().flat_map(|c| [c, ' ']).collect();
    Vocab::build(catalog, pack, &[WALL, AGENT, EMPTY, RPS_GOAL, "beats", &alphabet])
}

pub fn encode_observation(obs: &Observation, vocab: &Vocab) -> Result<ObsInput> {
    let (w, h) = (obs.width, obs.height);
    let mut cells = vec![Vec::new(); w * h];
    let mut agent = None;
    for (x, col) in obs.cells.iter().enumerate() {
        for (y, text) in col.iter().enumerate() {
            if text == AGENT {
                agent = Some((x, y));
            }
            cells[y * w + x] = vocab.encode(text);
        }
    }
    let agent = agent.ok_or_else(|| Error::InvalidConfig("observation has no agent cell".into()))?;
    Ok(ObsInput {
        width: w,
        height: h,
        agent,
        cells,
        goal: vocab.encode(&obs.goal),
        inventory: vocab.encode(&obs.inventory),
        document: vocab.encode(&obs.doc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Environment;
    use crate::nlgen::UNK;
    use crate::worldgen::Preset;

    #[test]
    fn every_observed_word_is_known() {
        for preset in Preset::ALL {
            let env = Environment::new(preset.config()).unwrap();
            let vocab = observation_vocab(&env.catalog, &env.pack);
            for seed in 0..50 {
                let obs = env.reset(seed).unwrap().render_observation();
                let input = encode_observation(&obs, &vocab).unwrap();
                let all = input
                    .cells
                    .iter()
                    .flatten()
                    .chain(&input.goal)
                    .chain(&input.document)
                    .chain(&input.inventory);
                assert!(all.into_iter().all(|&t| t != vocab.id(UNK)), "{preset:?} seed {seed}");
                assert_eq!(
                    input.cells[input.agent.1 * obs.width + input.agent.0],
                    vocab.encode(AGENT)
                );
            }
        }
    }
}
