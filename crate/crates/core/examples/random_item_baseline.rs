//! An agent that grabs a random item before attacking wins about half of
//! stationary one-to-one episodes: exactly one of the two items beats the
//! target.

use rtfm::agents::{evaluate_agent, AgentKind};
use rtfm::engine::Environment;
use rtfm::worldgen::Preset;

pub fn run_example() -> rtfm::Result<()> {
    let episodes = std::env::var("EPISODES")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(500);
    let env = Environment::new(Preset::Base6.config())?;
    let t = std::time::Instant::now();
    let stats = evaluate_agent(AgentKind::RandomItem, &env, episodes, 0)?;
    println!(
        "random item then target: {} / {} wins ({:.3}) in {:.2?}",
        stats.wins,
        stats.episodes,
        stats.win_rate,
        t.elapsed()
    );
    let unarmed = evaluate_agent(AgentKind::Unarmed, &env, episodes, 0)?;
    println!("unarmed attacker: {} / {} wins", unarmed.wins, unarmed.episodes);
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
