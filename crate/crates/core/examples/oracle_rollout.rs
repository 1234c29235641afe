//! Win rates of the document-reading oracle and the baselines on every preset.
//!
//! `EPISODES=1000 cargo run --release --example oracle_rollout`

use rtfm::agents::{evaluate_agent, AgentKind};
use rtfm::engine::Environment;
use rtfm::worldgen::Preset;

pub fn run_example() -> rtfm::Result<()> {
    let episodes = std::env::var("EPISODES")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    println!(
        "{:<7} {:<14} {:>8} {:>11} {:>7}",
        "preset", "agent", "win_rate", "mean_frames", "no_plan"
    );
    for preset in Preset::ALL {
        let env = Environment::new(preset.config())?;
        for kind in AgentKind::ALL {
            let stats = evaluate_agent(kind, &env, episodes, 0)?;
            println!(
                "{:<7} {:<14} {:>8.3} {:>11.1} {:>7}",
                preset.name(),
                format!("{kind:?}"),
                stats.win_rate,
                stats.mean_frames,
                stats.no_plan
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
