//! The play service: one episode per connection, spoken as JSON messages.
//!
//! Plain TCP clients send one message per line. Browser clients connect to
//! the same port with a WebSocket upgrade and send one message per text
//! frame.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::engine::{Action, Environment, Observation, WorldState};
use crate::error::{Error, Result};
use crate::log::{append_jsonl, EpisodeLog, LogOutcome, LOG_VERSION};
use crate::worldgen::{EpisodeConfig, Preset, SplitId};

/// Environment variable naming the directory for the human-baseline log.
pub const LOG_DIR_ENV: &str = "RTFM_LOG_DIR";
pub const HUMAN_LOG_FILE: &str = "human_baseline.jsonl";
pub const HUMAN_TAG: &str = "human";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlayMessage {
    Hello {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<Preset>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dyna: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nl: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        split: Option<SplitId>,
    },
    Obs {
        frame: u32,
        width: usize,
        height: usize,
        /// Rows top to bottom: `cells[y][x]`.
        cells: Vec<Vec<String>>,
        doc: String,
        goal: String,
        inventory: String,
    },
    Act {
        action: String,
    },
    End {
        outcome: LogOutcome,
        win: bool,
        reward: f64,
        frames: u32,
    },
    Error {
        message: String,
    },
}

impl PlayMessage {
    pub fn hello(preset: Preset) -> Self {
        PlayMessage::Hello {
            preset: Some(preset),
            seed: None,
            dyna: None,
            group: None,
            nl: None,
            split: None,
        }
    }

    pub fn act(action: Action) -> Self {
        PlayMessage::Act {
            action: action.as_str().to_string(),
        }
    }

    pub fn obs(o: &Observation) -> Self {
        let rows = (0..o.height)
            .map(|y| (0..o.width).map(|x| o.cells[x][y].clone()).collect())
            .collect();
        PlayMessage::Obs {
            frame: o.frame,
            width: o.width,
            height: o.height,
            cells: rows,
            doc: o.doc.clone(),
            goal: o.goal.clone(),
            inventory: o.inventory.clone(),
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        PlayMessage::Error {
            message: message.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("message serializes")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Protocol(format!("bad message: {e}")))
    }
}

/// Defaults shared by every session of a server.
#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub defaults: EpisodeConfig,
    pub base_seed: u64,
    /// Finished and abandoned sessions are appended here; `None` disables logging.
    pub log_path: Option<PathBuf>,
}

impl ServeOptions {
    /// Logs to `$RTFM_LOG_DIR/human_baseline.jsonl`, or `./logs/` when unset.
    pub fn new(defaults: EpisodeConfig, base_seed: u64) -> Self {
        let dir = std::env::var_os(LOG_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("logs"));
        ServeOptions {
            defaults,
            base_seed,
            log_path: Some(dir.join(HUMAN_LOG_FILE)),
        }
    }
}

struct Live {
    config: EpisodeConfig,
    seed: u64,
    state: WorldState,
    actions: Vec<Action>,
    rewards: Vec<f64>,
}

enum Phase {
    AwaitHello,
    Playing(Box<Live>),
    Finished(Box<Live>),
}

/// Protocol state machine for one connection, independent of transport.
pub struct PlaySession {
    defaults: EpisodeConfig,
    default_seed: u64,
    phase: Phase,
}

impl PlaySession {
    pub fn new(defaults: EpisodeConfig, default_seed: u64) -> Self {
        PlaySession {
            defaults,
            default_seed,
            phase: Phase::AwaitHello,
        }
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, Phase::Finished(_))
    }

    /// The current frame while an episode is live.
    pub fn current(&self) -> Option<PlayMessage> {
        match &self.phase {
            Phase::Playing(live) => Some(PlayMessage::obs(&live.state.render_observation())),
            _ => None,
        }
    }

    /// Replies to one client message. A live session always answers an act
    /// with exactly one `obs` or `end`, preceded by an `error` when the act
    /// was rejected.
    pub fn handle(&mut self, msg: PlayMessage) -> Vec<PlayMessage> {
        match (&mut self.phase, msg) {
            (
                Phase::AwaitHello,
                PlayMessage::Hello {
                    preset,
                    seed,
                    dyna,
                    group,
                    nl,
                    split,
                },
            ) => {
                let mut config = preset.map(Preset::config).unwrap_or_else(|| self.defaults.clone());
                if let Some(v) = dyna {
                    config.dyna = v;
                }
                if let Some(v) = group {
                    config.group = v;
                }
                if let Some(v) = nl {
                    config.nl = v;
                }
                if let Some(v) = split {
                    config.split = v;
                }
                let seed = seed.unwrap_or(self.default_seed);
                match Environment::new(config.clone()).and_then(|env| env.reset(seed)) {
                    Ok(state) => {
                        let obs = PlayMessage::obs(&state.render_observation());
                        self.phase = Phase::Playing(Box::new(Live {
                            config,
                            seed,
                            state,
                            actions: Vec::new(),
                            rewards: Vec::new(),
                        }));
                        vec![obs]
                    }
                    Err(e) => vec![PlayMessage::error(e.to_string())],
                }
            }
            (Phase::AwaitHello, _) => vec![PlayMessage::error("expected hello")],
            (Phase::Playing(live), msg) => {
                let current = PlayMessage::obs(&live.state.render_observation());
                let action = match msg {
                    PlayMessage::Act { action } => action.parse::<Action>(),
                    _ => return vec![PlayMessage::error("expected act"), current],
                };
                let action = match action {
                    Ok(a) => a,
                    Err(e) => return vec![PlayMessage::error(e.to_string()), current],
                };
                let r = match live.state.step(action) {
                    Ok(r) => r,
                    Err(e) => return vec![PlayMessage::error(e.to_string()), current],
                };
                live.actions.push(action);
                live.rewards.push(r.reward);
                if !r.done {
                    return vec![PlayMessage::obs(&r.observation)];
                }
                let end = PlayMessage::End {
                    outcome: LogOutcome::from_outcome(r.outcome),
                    win: r.reward > 0.0,
                    reward: r.reward,
                    frames: live.state.frame,
                };
                let Phase::Playing(live) = std::mem::replace(&mut self.phase, Phase::AwaitHello) else {
                    unreachable!()
                };
                self.phase = Phase::Finished(live);
                vec![end]
            }
            (Phase::Finished(_), _) => vec![PlayMessage::error("episode is over")],
        }
    }

    /// The session's log: complete after `end`, abandoned before it, and
    /// `None` if no episode started.
    pub fn log(&self) -> Option<EpisodeLog> {
        let live = match &self.phase {
            Phase::AwaitHello => return None,
            Phase::Playing(l) | Phase::Finished(l) => l,
        };
        Some(EpisodeLog {
            version: LOG_VERSION,
            config: live.config.clone(),
            seed: live.seed,
            actions: live.actions.clone(),
            rewards: live.rewards.clone(),
            outcome: LogOutcome::from_outcome(live.state.outcome),
            agent_tag: HUMAN_TAG.to_string(),
        })
    }
}

/// A bound play server; `run` blocks accepting connections.
pub struct PlayServer {
    listener: TcpListener,
    options: Arc<ServeOptions>,
    sessions: Arc<AtomicU64>,
    log_lock: Arc<Mutex<()>>,
}

impl PlayServer {
    pub fn bind(addr: &str, options: ServeOptions) -> Result<Self> {
        Ok(PlayServer {
            listener: TcpListener::bind(addr)?,
            options: Arc::new(options),
            sessions: Arc::new(AtomicU64::new(0)),
            log_lock: Arc::new(Mutex::new(())),
        })
    }

    pub fn local_addr(&self) -> Result<std::net::SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Serves each connection on its own thread until the listener fails.
    pub fn run(self) -> Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let options = self.options.clone();
            let seed = options.base_seed + self.sessions.fetch_add(1, Ordering::SeqCst);
            let lock = self.log_lock.clone();
            std::thread::spawn(move || {
                let mut session = PlaySession::new(options.defaults.clone(), seed);
                let _ = serve_connection(stream, &mut session);
                if let (Some(path), Some(log)) = (&options.log_path, session.log()) {
                    let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
                    if let Err(e) = append_jsonl(path, &[log]) {
                        eprintln!("cannot write {}: {e}", path.display());
                    }
                }
            });
        }
        Ok(())
    }

    /// Runs the server on a background thread.
    pub fn spawn(self) -> std::thread::JoinHandle<Result<()>> {
        std::thread::spawn(move || self.run())
    }
}

fn is_websocket(stream: &TcpStream) -> Result<bool> {
    let mut head = [0u8; 4];
    let n = stream.peek(&mut head)?;
    Ok(n == 4 && &head == b"GET ")
}

fn serve_connection(stream: TcpStream, session: &mut PlaySession) -> Result<()> {
    if is_websocket(&stream)? {
        serve_websocket(stream, session)
    } else {
        serve_lines(stream, session)
    }
}

fn reply(session: &mut PlaySession, text: &str) -> Vec<PlayMessage> {
    match PlayMessage::from_line(text) {
        Ok(msg) => session.handle(msg),
        Err(e) => {
            let mut out = vec![PlayMessage::error(e.to_string())];
            out.extend(session.current());
            out
        }
    }
}

fn serve_lines(stream: TcpStream, session: &mut PlaySession) -> Result<()> {
    let mut writer = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut out = String::new();
        for msg in reply(session, &line) {
            out.push_str(&msg.to_line());
            out.push('\n');
        }
        writer.write_all(out.as_bytes())?;
        writer.flush()?;
        if session.is_finished() {
            break;
        }
    }
    Ok(())
}

fn serve_websocket(stream: TcpStream, session: &mut PlaySession) -> Result<()> {
    use tungstenite::Message;
    let mut ws = tungstenite::accept(stream).map_err(|e| Error::Protocol(format!("websocket handshake: {e}")))?;
    let ws_err = |e: tungstenite::Error| Error::Protocol(e.to_string());
    loop {
        let text = match ws.read().map_err(ws_err)? {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => return Ok(()),
            _ => continue,
        };
        for msg in reply(session, &text) {
            ws.send(Message::text(msg.to_line())).map_err(ws_err)?;
        }
        if session.is_finished() {
            let _ = ws.close(None);
            let _ = ws.flush();
            return Ok(());
        }
    }
}
