//! Prints every frame of one oracle episode, along with the plan the oracle
//! read out of the document.

use rtfm::agents::Oracle;
use rtfm::engine::Environment;
use rtfm::worldgen::Preset;

pub fn run_example() -> rtfm::Result<()> {
    let preset: Preset = std::env::var("PRESET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(Preset::Full6);
    let seed = std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(3);
    let env = Environment::new(preset.config())?;
    let mut state = env.reset(seed)?;
    let mut oracle = Oracle::for_env(&env);
    let mut obs = state.render_observation();
    while !state.is_done() {
        print!("{}", obs.to_text());
        let (action, plan) = oracle.plan(&obs)?;
        println!(
            "plan: item {:?}, target at ({}, {}), armed {} -> {action}\n",
            plan.chosen_item, plan.target.x, plan.target.y, plan.armed
        );
        obs = state.step(action)?.observation;
    }
    print!("{}", obs.to_text());
    println!("outcome: {:?} after {} frames", state.outcome, state.frame);
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
