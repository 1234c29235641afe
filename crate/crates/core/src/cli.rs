//! Command-line front end. Every subcommand prints JSON on stdout.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::agents::{evaluate_agent, play_episodes, AgentKind};
use crate::engine::{chase_statistic, Environment};
use crate::error::{Error, Result};
use crate::log::{append_jsonl, read_jsonl, EpisodeLog, LogOutcome};
use crate::nlgen::tokenize;
use crate::play::{PlayServer, ServeOptions};
use crate::rps::RpsSplit;
use crate::worldgen::{count_space, EpisodeConfig, Preset, SplitId, Task};

#[derive(Debug, Parser)]
#[command(name = "rtfm", version, about = "RTFM environments, agents and tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "base6")]
    pub preset: Preset,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dyna: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub group: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub nl: Option<bool>,
    #[arg(long, value_parser = parse_split)]
    pub split: Option<SplitId>,
}

fn parse_split(s: &str) -> std::result::Result<SplitId, String> {
    match s {
        "train" => Ok(SplitId::Train),
        "eval" => Ok(SplitId::Eval),
        _ => Err(format!("unknown split {s:?}: expected train or eval")),
    }
}

impl Common {
    pub fn config(&self) -> EpisodeConfig {
        let mut c = self.preset.config();
        if let Some(v) = self.dyna {
            c.dyna = v;
        }
        if let Some(v) = self.group {
            c.group = v;
        }
        if let Some(v) = self.nl {
            c.nl = v;
        }
        if let Some(v) = self.split {
            c.split = v;
        }
        c
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an agent over seeded episodes.
    Rollout {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "oracle")]
        agent: AgentKind,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        /// Include the per-seed outcomes.
        #[arg(long)]
        by_seed: bool,
    },
    /// Play episodes with an agent and write their logs as JSON lines.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "oracle")]
        agent: AgentKind,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        /// Append to this file instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarise a log file, or the preset's environment when no log is given.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
    },
    /// Count distinct dynamics and documents.
    Count {
        #[command(flatten)]
        common: Common,
    },
    /// Finite-difference gradient checks of the policy network.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Serve episodes to play clients.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: String,
    },
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 on failure, 2 on bad usage.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let result = match &cli.command {
        Command::Serve { common, addr } => serve(common, addr, err),
        other => execute(other).and_then(|v| {
            let text = if let Value::String(s) = &v {
                s.clone()
            } else {
                serde_json::to_string_pretty(&v)? + "\n"
            };
            out.write_all(text.as_bytes())?;
            Ok(())
        }),
    };
    match result {
        Ok(()) => 0,
        Err(Error::InvalidConfig(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn serve(common: &Common, addr: &str, err: &mut dyn Write) -> Result<()> {
    let config = common.config();
    config.validate()?;
    let server = PlayServer::bind(addr, ServeOptions::new(config, common.seed))?;
    writeln!(err, "listening on {}", server.local_addr()?)?;
    server.run()
}

/// Runs every command except `serve`. `gen` without `--out` returns its
/// JSON lines as a string value.
pub fn execute(command: &Command) -> Result<Value> {
    match command {
        Command::Rollout {
            common,
            agent,
            episodes,
            by_seed,
        } => {
            let env = Environment::new(common.config())?;
            let stats = evaluate_agent(*agent, &env, *episodes, common.seed)?;
            let mut v = json!({
                "agent": agent,
                "preset": common.preset,
                "config": env.config,
                "seed": common.seed,
                "episodes": stats.episodes,
                "wins": stats.wins,
                "win_rate": stats.win_rate,
                "mean_frames": stats.mean_frames,
                "no_plan": stats.no_plan,
            });
            if *by_seed {
                v["by_seed"] = serde_json::to_value(&stats.by_seed)?;
            }
            Ok(v)
        }
        Command::Gen {
            common,
            agent,
            episodes,
            out,
        } => {
            let env = Environment::new(common.config())?;
            let tag = agent.build(&env, 0).tag();
            let logs: Vec<EpisodeLog> = play_episodes(*agent, &env, *episodes, common.seed)?
                .iter()
                .map(|r| EpisodeLog::from_record(&env.config, r, tag))
                .collect();
            match out {
                Some(path) => {
                    append_jsonl(path, &logs)?;
                    Ok(json!({ "written": logs.len(), "path": path }))
                }
                None => Ok(Value::String(logs.iter().map(|l| l.encode() + "\n").collect())),
            }
        }
        Command::Stats { common, log, episodes } => match log {
            Some(path) => log_stats(&read_jsonl(path)?),
            None => env_stats(&common.config(), *episodes, common.seed),
        },
        Command::Count { common } => {
            let env = Environment::new(common.config())?;
            let counts = count_space(&env.catalog, &env.config, env.pack.sizes());
            Ok(json!({
                "config": env.config,
                "dynamics": counts.dynamics.to_string(),
                "documents": counts.documents.to_string(),
                "dynamics_f64": counts.dynamics as f64,
                "documents_f64": counts.documents as f64,
            }))
        }
        Command::Gradcheck { common, eps, tolerance } => {
            use txt2pi::gradcheck::{film2_gradcheck, txt2pi_gradcheck};
            use txt2pi::loss::{baseline_loss, entropy_loss};
            let film2 = film2_gradcheck(common.seed, *eps)?;
            let full = txt2pi_gradcheck(common.seed, *eps)?;
            let uniform = entropy_loss(&[0.2; 5])?;
            let baseline = baseline_loss(&[3.0, 4.0])?;
            let pass = film2.max_relative_error < *tolerance && full.max_relative_error < *tolerance;
            Ok(json!({
                "film2": film2,
                "txt2pi": full,
                "tolerance": tolerance,
                "entropy_uniform5": uniform,
                "ln5": 5f64.ln(),
                "baseline_3_4": baseline,
                "pass": pass,
            }))
        }
        Command::Serve { .. } => Err(Error::InvalidConfig("serve runs through `run`".into())),
    }
}

fn log_stats(logs: &[EpisodeLog]) -> Result<Value> {
    let mut outcomes: BTreeMap<String, usize> = BTreeMap::new();
    let mut agents: BTreeMap<String, usize> = BTreeMap::new();
    let mut replay_failures = 0;
    for l in logs {
        let key = serde_json::to_value(l.outcome)?.as_str().unwrap_or("").to_string();
        *outcomes.entry(key).or_default() += 1;
        *agents.entry(l.agent_tag.clone()).or_default() += 1;
        if l.replay().is_err() {
            replay_failures += 1;
        }
    }
    let n = logs.len();
    let wins = logs.iter().filter(|l| l.outcome == LogOutcome::Win).count();
    let frames: usize = logs.iter().map(|l| l.actions.len()).sum();
    Ok(json!({
        "episodes": n,
        "wins": wins,
        "win_rate": if n == 0 { 0.0 } else { wins as f64 / n as f64 },
        "mean_frames": if n == 0 { 0.0 } else { frames as f64 / n as f64 },
        "outcomes": outcomes,
        "agents": agents,
        "replay_failures": replay_failures,
    }))
}

fn env_stats(config: &EpisodeConfig, episodes: usize, seed: u64) -> Result<Value> {
    let env = Environment::new(config.clone())?;
    let mut attempts = 0u64;
    let mut redrawn = 0usize;
    let mut doc_tokens = 0usize;
    for s in seed..seed + episodes as u64 {
        let state = env.reset(s)?;
        attempts += state.placement_attempts as u64;
        redrawn += (state.placement_attempts > 1) as usize;
        doc_tokens += tokenize(&state.doc).len();
    }
    let n = episodes.max(1) as f64;
    let mut v = json!({
        "config": env.config,
        "episodes": episodes,
        "mean_placement_attempts": attempts as f64 / n,
        "redrawn_fraction": redrawn as f64 / n,
        "mean_document_tokens": doc_tokens as f64 / n,
    });
    match (&env.config.task, env.splits(), env.rps_split()) {
        (Task::Rtfm, Some((train, eval)), _) => {
            v["train_tuples"] = json!(train.len());
            v["eval_tuples"] = json!(eval.len());
        }
        (Task::Rps(_), _, Some(split)) => {
            v["train_graphs"] = json!(split.train_graphs.len());
            v["dev_graphs"] = json!(split.dev_graphs.len());
            v["train_node_triples"] = json!(RpsSplit::node_triples(&split.train_graphs).len());
        }
        _ => {}
    }
    if env.config.dyna {
        let chase = chase_statistic(&env, 10_000, seed)?;
        v["chase"] = serde_json::to_value(chase)?;
        v["chase_fraction"] = json!(chase.chase_fraction());
    }
    Ok(v)
}
