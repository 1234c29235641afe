//! Starts a play server on a free port and plays one episode over the
//! line protocol, choosing moves with the oracle from the received frames.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;

use rtfm::agents::{Oracle, Policy, Reader};
use rtfm::engine::{Environment, Observation};
use rtfm::play::{PlayMessage, PlayServer, ServeOptions};
use rtfm::worldgen::Preset;

fn to_observation(msg: &PlayMessage) -> Option<Observation> {
    match msg {
        PlayMessage::Obs {
            frame,
            width,
            height,
            cells,
            doc,
            goal,
            inventory,
        } => Some(Observation {
            width: *width,
            height: *height,
            cells: (0..*width)
                .map(|x| (0..*height).map(|y| cells[y][x].clone()).collect())
                .collect(),
            doc: doc.clone(),
            goal: goal.clone(),
            inventory: inventory.clone(),
            frame: *frame,
        }),
        _ => None,
    }
}

pub fn run_example() -> rtfm::Result<()> {
    let mut options = ServeOptions::new(Preset::Base6.config(), 7);
    options.log_path = None;
    let server = PlayServer::bind("127.0.0.1:0", options)?;
    let addr = server.local_addr()?;
    server.spawn();

    let env = Environment::new(Preset::Base6.config())?;
    let mut oracle = Oracle::new(Reader::for_env(&env), false);
    let stream = TcpStream::connect(addr)?;
    let mut writer = stream.try_clone()?;
    let mut lines = BufReader::new(stream).lines();
    writeln!(writer, "{}", PlayMessage::hello(Preset::Base6).to_line())?;
    loop {
        let line = lines
            .next()
            .ok_or_else(|| rtfm::Error::Protocol("server closed".into()))??;
        let msg = PlayMessage::from_line(&line)?;
        if let PlayMessage::End {
            win, reward, frames, ..
        } = msg
        {
            println!("end: win {win}, reward {reward}, {frames} frames");
            return Ok(());
        }
        let obs = to_observation(&msg).ok_or_else(|| rtfm::Error::Protocol(line.clone()))?;
        let action = oracle.act(&obs)?;
        println!("frame {} -> {action}", obs.frame);
        writeln!(writer, "{}", PlayMessage::act(action).to_line())?;
    }
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
