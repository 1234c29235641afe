//! Episode logs: enough to replay an episode bit for bit, stored as JSON
//! lines.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::EpisodeRecord;
use crate::engine::{Action, Environment, Outcome};
use crate::error::{Error, Result};
use crate::worldgen::EpisodeConfig;

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogOutcome {
    Win,
    LossCombat,
    LossTimeout,
    /// The player left before the episode ended.
    Abandoned,
}

impl LogOutcome {
    /// `Ongoing` maps to `Abandoned`.
    pub fn from_outcome(o: Outcome) -> Self {
        match o {
            Outcome::Win => LogOutcome::Win,
            Outcome::LossCombat => LogOutcome::LossCombat,
            Outcome::LossTimeout => LogOutcome::LossTimeout,
            Outcome::Ongoing => LogOutcome::Abandoned,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub version: u32,
    pub config: EpisodeConfig,
    pub seed: u64,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub outcome: LogOutcome,
    pub agent_tag: String,
}

impl EpisodeLog {
    pub fn from_record(config: &EpisodeConfig, record: &EpisodeRecord, agent_tag: &str) -> Self {
        EpisodeLog {
            version: LOG_VERSION,
            config: config.clone(),
            seed: record.seed,
            actions: record.actions.clone(),
            rewards: record.rewards.clone(),
            outcome: LogOutcome::from_outcome(record.outcome),
            agent_tag: agent_tag.to_string(),
        }
    }

    /// One JSON line, without the trailing newline.
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("log serializes")
    }

    /// Checks the version before anything else so old or future logs fail
    /// with [`Error::VersionMismatch`] rather than a field error.
    pub fn decode(line: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(line)?;
        let found = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::InvalidConfig("log has no version".into()))?;
        if found != LOG_VERSION as u64 {
            return Err(Error::VersionMismatch {
                found: found.min(u32::MAX as u64) as u32,
                expected: LOG_VERSION,
            });
        }
        let log: EpisodeLog = serde_json::from_value(value)?;
        if log.rewards.len() != log.actions.len() {
            return Err(Error::ReplayMismatch(format!(
                "{} rewards for {} actions",
                log.rewards.len(),
                log.actions.len()
            )));
        }
        Ok(log)
    }

    /// Re-simulates the episode and checks every reward bit for bit and the
    /// outcome.
    pub fn replay(&self) -> Result<()> {
        let env = Environment::new(self.config.clone())?;
        let mut state = env.reset(self.seed)?;
        for (i, (&action, &logged)) in self.actions.iter().zip(&self.rewards).enumerate() {
            if state.is_done() {
                return Err(Error::ReplayMismatch(format!("episode ended before action {i}")));
            }
            let r = state.step(action)?;
            if r.reward.to_bits() != logged.to_bits() {
                return Err(Error::ReplayMismatch(format!(
                    "reward {} at step {i}, logged {logged}",
                    r.reward
                )));
            }
        }
        let outcome = LogOutcome::from_outcome(state.outcome);
        if outcome != self.outcome {
            return Err(Error::ReplayMismatch(format!(
                "outcome {outcome:?}, logged {:?}",
                self.outcome
            )));
        }
        Ok(())
    }
}

pub fn append_jsonl(path: &Path, logs: &[EpisodeLog]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut buf = String::new();
    for log in logs {
        buf.push_str(&log.encode());
        buf.push('\n');
    }
    f.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<EpisodeLog>> {
    let f = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(EpisodeLog::decode(&line)?);
        }
    }
    Ok(out)
}
