//! Records oracle episodes as JSON lines, reads them back and replays each
//! one against the engine.

use rtfm::agents::{play_episodes, AgentKind};
use rtfm::engine::Environment;
use rtfm::log::{append_jsonl, read_jsonl, EpisodeLog};
use rtfm::worldgen::Preset;

pub fn run_example() -> rtfm::Result<()> {
    let env = Environment::new(Preset::Full10.config())?;
    let records = play_episodes(AgentKind::Oracle, &env, 20, 100)?;
    let logs: Vec<EpisodeLog> = records
        .iter()
        .map(|r| EpisodeLog::from_record(&env.config, r, "oracle"))
        .collect();
    let path = std::env::temp_dir().join(format!("rtfm-replay-{}.jsonl", std::process::id()));
    let _ = std::fs::remove_file(&path);
    append_jsonl(&path, &logs)?;
    let back = read_jsonl(&path)?;
    assert_eq!(back, logs);
    for log in &back {
        log.replay()?;
    }
    let wins = back.iter().filter(|l| l.rewards.last() == Some(&1.0)).count();
    println!(
        "{} logs written to {}, all replayed exactly; {wins} wins",
        back.len(),
        path.display()
    );
    std::fs::remove_file(&path)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
