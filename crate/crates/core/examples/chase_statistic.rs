//! How often moving monsters take the chase branch, and whether chase moves
//! always close the distance.

use rtfm::engine::{chase_statistic, Environment};
use rtfm::worldgen::Preset;

pub fn run_example() -> rtfm::Result<()> {
    let n = std::env::var("TRANSITIONS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000);
    let env = Environment::new(Preset::Full10.config())?;
    let s = chase_statistic(&env, n, 0)?;
    println!(
        "{} transitions: chase fraction {:.4}, fallbacks {}, chase moves not closer {}",
        s.transitions,
        s.chase_fraction(),
        s.fallback,
        s.chase_violations
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
