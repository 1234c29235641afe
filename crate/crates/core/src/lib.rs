//! Seedable RTFM grid-world environments: dynamics sampling with disjoint
//! train/eval splits, templated documents, the game engine, the
//! rock-paper-scissors variant, scripted reading agents, episode logs and a
//! line-delimited JSON play service.

pub mod agents;
pub mod cli;
pub mod encode;
pub mod engine;
pub mod error;
pub mod log;
pub mod nlgen;
pub mod play;
pub mod rps;
pub mod worldgen;

pub use error::{Error, Result};
