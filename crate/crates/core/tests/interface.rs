use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtfm::agents::{play_episodes, AgentKind};
use rtfm::cli;
use rtfm::engine::{Action, Environment};
use rtfm::log::*;
use rtfm::play::*;
use rtfm::worldgen::Preset;
use rtfm::Error;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("rtfm").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn random_log(rng: &mut ChaCha8Rng) -> EpisodeLog {
    let preset = *Preset::ALL.choose(rng).unwrap();
    let env = Environment::new(preset.config()).unwrap();
    let seed = rng.gen::<u32>() as u64;
    let mut state = env.reset(seed).unwrap();
    let (mut actions, mut rewards) = (Vec::new(), Vec::new());
    let len = rng.gen_range(1..60);
    while !state.is_done() && actions.len() < len {
        let a = *Action::ALL.choose(rng).unwrap();
        rewards.push(state.step(a).unwrap().reward);
        actions.push(a);
    }
    EpisodeLog {
        version: LOG_VERSION,
        config: env.config.clone(),
        seed,
        actions,
        rewards,
        outcome: LogOutcome::from_outcome(state.outcome),
        agent_tag: "random".into(),
    }
}

#[test]
fn logs_round_trip_and_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..200 {
        let log = random_log(&mut rng);
        let line = log.encode();
        assert!(!line.contains('\n'));
        let back = EpisodeLog::decode(&line).unwrap();
        assert_eq!(back, log);
        back.replay().unwrap();
    }
}

#[test]
fn oracle_logs_replay_to_the_same_terminal_reward() {
    let env = Environment::new(Preset::Full10.config()).unwrap();
    for r in play_episodes(AgentKind::Oracle, &env, 30, 0).unwrap() {
        let log = EpisodeLog::from_record(&env.config, &r, "oracle");
        EpisodeLog::decode(&log.encode()).unwrap().replay().unwrap();
    }
}

#[test]
fn unknown_version_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut v: serde_json::Value = serde_json::from_str(&random_log(&mut rng).encode()).unwrap();
    v["version"] = 999.into();
    let err = EpisodeLog::decode(&v.to_string()).unwrap_err();
    assert!(
        matches!(
            err,
            Error::VersionMismatch {
                found: 999,
                expected: 1
            }
        ),
        "{err}"
    );
}

#[test]
fn tampered_log_fails_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut log = random_log(&mut rng);
    *log.rewards.last_mut().unwrap() += 0.5;
    assert!(matches!(log.replay(), Err(Error::ReplayMismatch(_))));
}

#[test]
fn jsonl_files_append() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/logs.jsonl");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_log(&mut rng);
    let b = random_log(&mut rng);
    append_jsonl(&path, std::slice::from_ref(&a)).unwrap();
    append_jsonl(&path, std::slice::from_ref(&b)).unwrap();
    assert_eq!(read_jsonl(&path).unwrap(), vec![a, b]);
}

#[test]
fn cli_rollout_reports_oracle_completeness() {
    let (code, out, _) = run_cli(&[
        "rollout",
        "--agent",
        "oracle",
        "--preset",
        "base6",
        "--episodes",
        "1000",
        "--seed",
        "0",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["win_rate"], 1.0);
    assert_eq!(v["episodes"], 1000);
}

#[test]
fn cli_gen_writes_one_record_per_episode() {
    let (code, out, _) = run_cli(&["gen", "--preset", "base6", "--episodes", "2", "--seed", "1"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    for l in lines {
        EpisodeLog::decode(l).unwrap().replay().unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.jsonl");
    let f = file.to_str().unwrap();
    let (code, _, _) = run_cli(&[
        "gen",
        "--preset",
        "full6",
        "--agent",
        "random-item",
        "--episodes",
        "3",
        "--out",
        f,
    ]);
    assert_eq!(code, 0);
    let (code, out, _) = run_cli(&["stats", "--log", f]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["episodes"], 3);
    assert_eq!(v["replay_failures"], 0);
}

#[test]
fn cli_usage_errors_exit_2() {
    for args in [
        vec!["rollout", "--preset", "bogus"],
        vec!["frobnicate"],
        vec!["rollout", "--episodes", "many"],
        vec!["rollout", "--split", "test"],
        vec!["rollout", "--episodes", "0"],
    ] {
        let (code, out, err) = run_cli(&args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty());
        assert!(!err.is_empty());
    }
    assert_eq!(run_cli(&["--help"]).0, 0);
}

#[test]
fn cli_output_is_byte_identical_across_runs() {
    for args in [
        vec![
            "rollout",
            "--agent",
            "random-item",
            "--preset",
            "full10",
            "--episodes",
            "50",
            "--seed",
            "4",
            "--by-seed",
        ],
        vec!["gen", "--preset", "rps", "--episodes", "3", "--seed", "2"],
        vec!["count", "--preset", "full10"],
        vec!["stats", "--preset", "full6", "--episodes", "30"],
    ] {
        let a = run_cli(&args);
        let b = run_cli(&args);
        assert_eq!(a.0, 0, "{args:?}: {}", a.2);
        assert_eq!(a, b);
    }
}

#[test]
fn cli_flag_overrides() {
    let (_, out, _) = run_cli(&["count", "--preset", "base6", "--group", "--nl"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["group"], true);
    assert_eq!(v["config"]["nl"], true);
    assert_eq!(v["dynamics"], "19051200");
    let (_, out, _) = run_cli(&["count", "--preset", "full10", "--group", "false"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["group"], false);
    assert_eq!(v["dynamics"], "846720");
}

#[test]
fn cli_gradcheck_passes() {
    let (code, out, _) = run_cli(&["gradcheck"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pass"], true);
}

struct Client {
    writer: TcpStream,
    lines: std::io::Lines<BufReader<TcpStream>>,
}

impl Client {
    fn connect(addr: std::net::SocketAddr) -> Self {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
        Client {
            writer: stream.try_clone().unwrap(),
            lines: BufReader::new(stream).lines(),
        }
    }

    fn send(&mut self, msg: &PlayMessage) {
        writeln!(self.writer, "{}", msg.to_line()).unwrap();
    }

    fn send_raw(&mut self, line: &str) {
        writeln!(self.writer, "{line}").unwrap();
    }

    fn recv(&mut self) -> PlayMessage {
        PlayMessage::from_line(&self.lines.next().unwrap().unwrap()).unwrap()
    }
}

fn server(dir: &std::path::Path) -> std::net::SocketAddr {
    let options = ServeOptions {
        defaults: Preset::Base6.config(),
        base_seed: 100,
        log_path: Some(dir.join(HUMAN_LOG_FILE)),
    };
    let s = PlayServer::bind("127.0.0.1:0", options).unwrap();
    let addr = s.local_addr().unwrap();
    s.spawn();
    addr
}

fn wait_for_logs(path: &std::path::Path, n: usize) -> Vec<EpisodeLog> {
    for _ in 0..200 {
        if let Ok(logs) = read_jsonl(path) {
            if logs.len() >= n {
                return logs;
            }
        }
        std::thread::sleep(Duration::from_millis(20));
    }
    panic!("log not written");
}

fn agent_of(cells: &[Vec<String>]) -> (usize, usize) {
    for (y, row) in cells.iter().enumerate() {
        for (x, c) in row.iter().enumerate() {
            if c == rtfm::engine::AGENT {
                return (x, y);
            }
        }
    }
    panic!("no agent");
}

#[test]
fn play_session_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let addr = server(dir.path());
    let seed = 3;
    let env = Environment::new(Preset::Base6.config()).unwrap();
    let mut engine = env.reset(seed).unwrap();

    let mut c = Client::connect(addr);
    c.send(&PlayMessage::Hello {
        preset: Some(Preset::Base6),
        seed: Some(seed),
        dyna: None,
        group: None,
        nl: None,
        split: None,
    });
    let first = c.recv();
    let PlayMessage::Obs {
        frame,
        width,
        height,
        ref cells,
        ..
    } = first
    else {
        panic!("{first:?}")
    };
    assert_eq!((frame, width, height), (0, 6, 6));
    assert_eq!(cells.len(), 6);
    assert_eq!(first, PlayMessage::obs(&engine.render_observation()));

    c.send_raw(r#"{"type":"act","action":"jump"}"#);
    assert!(matches!(c.recv(), PlayMessage::Error { .. }));
    assert_eq!(c.recv(), first);
    c.send_raw("not json");
    assert!(matches!(c.recv(), PlayMessage::Error { .. }));
    assert_eq!(c.recv(), first);

    // Play the oracle's moves and mirror them on a local engine.
    let mut oracle = rtfm::agents::Oracle::for_env(&env);
    let mut last = first;
    loop {
        let a = rtfm::agents::Policy::act(&mut oracle, &engine.render_observation()).unwrap();
        c.send(&PlayMessage::act(a));
        let expected = engine.step(a).unwrap();
        let got = c.recv();
        if expected.done {
            let PlayMessage::End {
                outcome,
                win,
                reward,
                frames,
            } = got
            else {
                panic!("{got:?}")
            };
            assert_eq!(outcome, LogOutcome::from_outcome(expected.outcome));
            assert_eq!((win, reward, frames), (true, 1.0, engine.frame));
            break;
        }
        assert_eq!(got, PlayMessage::obs(&expected.observation));
        let (PlayMessage::Obs { frame: f0, .. }, PlayMessage::Obs { frame: f1, .. }) = (&last, &got) else {
            panic!()
        };
        assert!(f1 > f0);
        last = got;
    }
    let logs = wait_for_logs(&dir.path().join(HUMAN_LOG_FILE), 1);
    assert_eq!(logs[0].agent_tag, HUMAN_TAG);
    assert_eq!(logs[0].outcome, LogOutcome::Win);
    assert_eq!(logs[0].seed, seed);
    logs[0].replay().unwrap();
}

#[test]
fn up_from_a_free_cell_moves_the_agent() {
    let dir = tempfile::tempdir().unwrap();
    let addr = server(dir.path());
    let env = Environment::new(Preset::Base6.config()).unwrap();
    let seed = (0..).find(|&s| {
        let st = env.reset(s).unwrap();
        st.cell(st.agent.step(Action::Up)) == rtfm::engine::Cell::Empty
    });
    let mut c = Client::connect(addr);
    c.send(&PlayMessage::Hello {
        preset: Some(Preset::Base6),
        seed,
        dyna: None,
        group: None,
        nl: None,
        split: None,
    });
    let PlayMessage::Obs { cells, .. } = c.recv() else {
        panic!()
    };
    let (x, y) = agent_of(&cells);
    c.send(&PlayMessage::act(Action::Up));
    let PlayMessage::Obs { frame, cells, .. } = c.recv() else {
        panic!()
    };
    assert_eq!(frame, 1);
    assert_eq!(agent_of(&cells), (x, y - 1));
}

#[test]
fn disconnect_is_logged_as_abandoned() {
    let dir = tempfile::tempdir().unwrap();
    let addr = server(dir.path());
    {
        let mut c = Client::connect(addr);
        c.send(&PlayMessage::hello(Preset::Full6));
        c.recv();
        c.send(&PlayMessage::act(Action::Stay));
        c.recv();
    }
    let logs = wait_for_logs(&dir.path().join(HUMAN_LOG_FILE), 1);
    assert_eq!(logs[0].outcome, LogOutcome::Abandoned);
    assert_eq!(logs[0].actions, vec![Action::Stay]);
    assert!(logs[0].config.dyna);
    // Default seeds count up from the server's base seed.
    assert_eq!(logs[0].seed, 100);
}

#[test]
fn act_before_hello_is_an_error() {
    let mut s = PlaySession::new(Preset::Base6.config(), 0);
    assert!(matches!(
        s.handle(PlayMessage::act(Action::Up))[..],
        [PlayMessage::Error { .. }]
    ));
    assert!(s.log().is_none());
    let bad = PlayMessage::Hello {
        preset: None,
        seed: None,
        dyna: None,
        group: None,
        nl: None,
        split: None,
    };
    assert!(matches!(s.handle(bad)[..], [PlayMessage::Obs { frame: 0, .. }]));
}

#[test]
fn play_session_over_websocket() {
    use tungstenite::Message;
    let dir = tempfile::tempdir().unwrap();
    let addr = server(dir.path());
    let stream = TcpStream::connect(addr).unwrap();
    let (mut ws, _) = tungstenite::client(format!("ws://{addr}/"), stream).unwrap();
    ws.send(Message::text(PlayMessage::hello(Preset::Base6).to_line()))
        .unwrap();
    let mut frames = 0;
    loop {
        let msg = match ws.read().unwrap() {
            Message::Text(t) => PlayMessage::from_line(&t).unwrap(),
            _ => continue,
        };
        match msg {
            PlayMessage::Obs { .. } => {
                frames += 1;
                ws.send(Message::text(PlayMessage::act(Action::Left).to_line()))
                    .unwrap();
                if frames > 3 {
                    break;
                }
            }
            PlayMessage::End { .. } => break,
            other => panic!("{other:?}"),
        }
    }
    assert!(frames >= 1);
}

#[test]
fn protocol_messages_have_the_documented_shape() {
    let hello: PlayMessage = serde_json::from_str(r#"{"type":"hello","preset":"full10","seed":5}"#).unwrap();
    assert_eq!(
        hello,
        PlayMessage::Hello {
            preset: Some(Preset::Full10),
            seed: Some(5),
            dyna: None,
            group: None,
            nl: None,
            split: None
        }
    );
    assert_eq!(
        PlayMessage::act(Action::Stay).to_line(),
        r#"{"type":"act","action":"stay"}"#
    );
    let end = PlayMessage::End {
        outcome: LogOutcome::LossCombat,
        win: false,
        reward: -1.0,
        frames: 4,
    };
    assert_eq!(
        end.to_line(),
        r#"{"type":"end","outcome":"loss_combat","win":false,"reward":-1.0,"frames":4}"#
    );
}
