//! Rock-paper-scissors variant: 3-cycles over a character alphabet, the
//! permutation / new-edge / new-edge-and-nodes splits, and episode setup.

use std::collections::BTreeSet;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{place, ItemInstance, MonsterInstance, Rules, WorldState};
use crate::error::{Error, Result};
use crate::nlgen::split_statements;
use crate::worldgen::{EntityCatalog, EpisodeConfig, SplitId};

pub const FULL_ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz0123456789";
pub const TRAIN_ALPHABET_SIZE: usize = 30;
/// Directed edges held out by the new-edge split.
pub const HELD_OUT_EDGES: usize = 20;
pub const RPS_GOAL: &str = "Defeat the monster.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RpsKind {
    Permutation,
    NewEdge,
    NewEdgeNodes,
}

/// A 3-cycle: `nodes[i]` beats `beats[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub nodes: [char; 3],
    pub beats: [char; 3],
}

impl DependencyGraph {
    /// `forward` gives `a > b > c > a` for sorted nodes `a < b < c`,
    /// otherwise `a > c > b > a`.
    pub fn cycle(mut nodes: [char; 3], forward: bool) -> Self {
        nodes.sort();
        let [a, b, c] = nodes;
        let beats = if forward { [b, c, a] } else { [c, a, b] };
        DependencyGraph { nodes, beats }
    }

    pub fn from_edges(edges: &[(char, char)]) -> Result<Self> {
        let bad = || Error::Unparseable(format!("{edges:?} is not a 3-cycle"));
        if edges.len() != 3 {
            return Err(bad());
        }
        let nodes: BTreeSet<char> = edges.iter().map(|e| e.0).collect();
        let targets: BTreeSet<char> = edges.iter().map(|e| e.1).collect();
        if nodes.len() != 3 || nodes != targets {
            return Err(bad());
        }
        let sorted: Vec<char> = nodes.into_iter().collect();
        let [a, b, c] = [sorted[0], sorted[1], sorted[2]];
        let g = DependencyGraph::cycle([a, b, c], edges.contains(&(a, b)));
        let mut want: Vec<(char, char)> = g.edges().to_vec();
        let mut got = edges.to_vec();
        want.sort();
        got.sort();
        if want != got {
            return Err(bad());
        }
        Ok(g)
    }

    pub fn beats(&self, x: char) -> Option<char> {
        self.nodes.iter().position(|&n| n == x).map(|i| self.beats[i])
    }

    /// The node that beats `y`.
    pub fn beaten_by(&self, y: char) -> Option<char> {
        self.beats.iter().position(|&n| n == y).map(|i| self.nodes[i])
    }

    pub fn edges(&self) -> [(char, char); 3] {
        [0, 1, 2].map(|i| (self.nodes[i], self.beats[i]))
    }

    pub fn is_valid(&self) -> bool {
        let distinct: BTreeSet<char> = self.nodes.iter().copied().collect();
        distinct.len() == 3
            && self.nodes.iter().all(|&n| {
                let once = self.beats(n).and_then(|m| self.beats(m)).and_then(|m| self.beats(m));
                once == Some(n) && self.beats(n) != Some(n)
            })
            && self.beats.iter().collect::<BTreeSet<_>>().len() == 3
    }

    pub fn statement(x: char, y: char) -> String {
        format!("{x} beats {y}.")
    }
}

/// A uniformly chosen 3-subset with a uniformly chosen orientation.
pub fn sample_graph<R: Rng + ?Sized>(alphabet: &[char], rng: &mut R) -> Result<DependencyGraph> {
    let distinct: BTreeSet<char> = alphabet.iter().copied().collect();
    if distinct.len() < 3 {
        return Err(Error::AlphabetTooSmall(distinct.len()));
    }
    let picked: Vec<char> = distinct.into_iter().choose_multiple(rng, 3);
    let forward = rng.gen_bool(0.5);
    Ok(DependencyGraph::cycle([picked[0], picked[1], picked[2]], forward))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpsSplit {
    pub kind: RpsKind,
    pub train_graphs: Vec<DependencyGraph>,
    pub dev_graphs: Vec<DependencyGraph>,
    pub train_alphabet: Vec<char>,
    pub dev_alphabet: Vec<char>,
}

impl RpsSplit {
    pub fn graphs(&self, split: SplitId) -> &[DependencyGraph] {
        match split {
            SplitId::Train => &self.train_graphs,
            SplitId::Eval => &self.dev_graphs,
        }
    }

    pub fn edges(graphs: &[DependencyGraph]) -> BTreeSet<(char, char)> {
        graphs.iter().flat_map(|g| g.edges()).collect()
    }

    pub fn nodes(graphs: &[DependencyGraph]) -> BTreeSet<char> {
        graphs.iter().flat_map(|g| g.nodes).collect()
    }

    pub fn node_triples(graphs: &[DependencyGraph]) -> BTreeSet<[char; 3]> {
        graphs.iter().map(|g| g.nodes).collect()
    }
}

fn triples(alphabet: &[char]) -> Vec<[char; 3]> {
    let mut out = Vec::new();
    for i in 0..alphabet.len() {
        for j in i + 1..alphabet.len() {
            for k in j + 1..alphabet.len() {
                out.push([alphabet[i], alphabet[j], alphabet[k]]);
            }
        }
    }
    out
}

fn both_orientations(alphabet: &[char]) -> Vec<DependencyGraph> {
    triples(alphabet)
        .into_iter()
        .flat_map(|t| [DependencyGraph::cycle(t, true), DependencyGraph::cycle(t, false)])
        .collect()
}

/// Builds the three split regimes from a seeded shuffle of the 36-character
/// alphabet; the first 30 characters form the training alphabet.
pub fn make_rps_splits(kind: RpsKind, seed: u64) -> RpsSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut full: Vec<char> = FULL_ALPHABET.chars().collect();
    full.shuffle(&mut rng);
    let mut train_alphabet = full[..TRAIN_ALPHABET_SIZE].to_vec();
    train_alphabet.sort();
    let mut all_chars = full.clone();
    all_chars.sort();
    match kind {
        RpsKind::Permutation => loop {
            let mut train = Vec::new();
            let mut dev = Vec::new();
            for t in triples(&train_alphabet) {
                let forward = rng.gen_bool(0.5);
                train.push(DependencyGraph::cycle(t, forward));
                dev.push(DependencyGraph::cycle(t, !forward));
            }
            if RpsSplit::edges(&dev).is_subset(&RpsSplit::edges(&train)) {
                break RpsSplit {
                    kind,
                    train_graphs: train,
                    dev_graphs: dev,
                    dev_alphabet: train_alphabet.clone(),
                    train_alphabet,
                };
            }
        },
        RpsKind::NewEdge => {
            let mut edges: Vec<(char, char)> = Vec::new();
            for &a in &train_alphabet {
                for &b in &train_alphabet {
                    if a != b {
                        edges.push((a, b));
                    }
                }
            }
            let held: BTreeSet<(char, char)> = edges.choose_multiple(&mut rng, HELD_OUT_EDGES).copied().collect();
            let (dev, train): (Vec<_>, Vec<_>) = both_orientations(&train_alphabet)
                .into_iter()
                .partition(|g| g.edges().iter().any(|e| held.contains(e)));
            RpsSplit {
                kind,
                train_graphs: train,
                dev_graphs: dev,
                dev_alphabet: train_alphabet.clone(),
                train_alphabet,
            }
        }
        RpsKind::NewEdgeNodes => {
            let train = both_orientations(&train_alphabet);
            let dev = both_orientations(&all_chars)
                .into_iter()
                .filter(|g| g.nodes.iter().any(|c| !train_alphabet.contains(c)))
                .collect();
            RpsSplit {
                kind,
                train_graphs: train,
                dev_graphs: dev,
                train_alphabet,
                dev_alphabet: all_chars,
            }
        }
    }
}

/// `(frames / mean_episode_len) / (grid_configs * graphs)`.
pub fn redundancy_probability(frames: f64, mean_episode_len: f64, grid_configs: f64, graphs: f64) -> Result<f64> {
    for (name, v) in [
        ("mean_episode_len", mean_episode_len),
        ("grid_configs", grid_configs),
        ("graphs", graphs),
    ] {
        if v == 0.0 {
            return Err(Error::DivisionDomain(name.into()));
        }
    }
    Ok((frames / mean_episode_len) / (grid_configs * graphs))
}

/// Reads a document of `x beats y.` statements back into a graph.
pub fn parse_rps_document(doc: &str) -> Result<DependencyGraph> {
    let mut edges = Vec::new();
    for s in split_statements(doc) {
        let body = s.strip_suffix('.').unwrap_or(s);
        let parts: Vec<&str> = body.split(" beats ").collect();
        let single = |t: &str| {
            let mut c = t.chars();
            match (c.next(), c.next()) {
                (Some(x), None) => Some(x),
                _ => None,
            }
        };
        match parts.as_slice() {
            [x, y] => match (single(x), single(y)) {
                (Some(x), Some(y)) => edges.push((x, y)),
                _ => return Err(Error::Unparseable(s.to_string())),
            },
            _ => return Err(Error::Unparseable(s.to_string())),
        }
    }
    if edges.len() < 3 {
        return Err(Error::MissingStatement(format!(
            "{} of 3 beats statements",
            edges.len()
        )));
    }
    DependencyGraph::from_edges(&edges)
}

/// One monster of a random type from a graph of the configured split, and
/// one item per type.
pub fn rps_episode<R: Rng + ?Sized>(
    config: &EpisodeConfig,
    split: &RpsSplit,
    catalog: &EntityCatalog,
    rng: &mut R,
) -> Result<WorldState> {
    let graph = *split
        .graphs(config.split)
        .choose(rng)
        .ok_or_else(|| Error::SplitExhausted(config.split.to_string()))?;
    let monster_type = *graph.nodes.choose(rng).expect("three nodes");
    let name = catalog.monsters.choose(rng).expect("non-empty").clone();
    let winner = graph.beaten_by(monster_type).expect("cycle");
    let winning_item = graph.nodes.iter().position(|&n| n == winner).expect("node");
    let mut statements: Vec<String> = graph
        .edges()
        .iter()
        .map(|&(x, y)| DependencyGraph::statement(x, y))
        .collect();
    statements.shuffle(rng);
    let (agent, mpos, ipos, attempts) = place(rng, config, 1, 3, winning_item, 0)?;
    let monsters = vec![MonsterInstance {
        name,
        element: monster_type.to_string(),
        team: None,
        pos: mpos[0],
        is_target: true,
    }];
    let items = graph
        .nodes
        .iter()
        .zip(&ipos)
        .map(|(n, &p)| ItemInstance {
            modifier: n.to_string(),
            weapon: None,
            pos: Some(p),
        })
        .collect();
    let episode_seed = rng.gen::<u64>();
    let mut state = WorldState::from_layout(
        config.clone(),
        Rules::Rps { graph },
        RPS_GOAL.to_string(),
        statements.join(" "),
        agent,
        monsters,
        items,
        &[],
        episode_seed,
    )?;
    state.placement_attempts = attempts;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_close_after_three_steps() {
        for forward in [true, false] {
            let g = DependencyGraph::cycle(['c', 'a', 'b'], forward);
            assert!(g.is_valid());
            for x in g.nodes {
                let y = g.beats(x).unwrap();
                assert_eq!(g.beaten_by(y), Some(x));
                assert_eq!(g.beats(g.beats(y).unwrap()), Some(x));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = sample_graph(&['a', 'b', 'c'], &mut rng).unwrap();
        assert!(g.is_valid());
    }

    #[test]
    fn small_alphabet_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_graph(&['a', 'b', 'a'], &mut rng),
            Err(Error::AlphabetTooSmall(2))
        ));
    }

    #[test]
    fn edges_round_trip() {
        let g = DependencyGraph::cycle(['x', 'y', 'z'], false);
        assert_eq!(DependencyGraph::from_edges(&g.edges()).unwrap(), g);
        assert!(DependencyGraph::from_edges(&[('a', 'b'), ('b', 'a'), ('c', 'a')]).is_err());
        let doc = g.edges().map(|(x, y)| DependencyGraph::statement(x, y)).join(" ");
        assert_eq!(parse_rps_document(&doc).unwrap(), g);
        assert!(matches!(
            parse_rps_document("a beats b."),
            Err(Error::MissingStatement(_))
        ));
        assert!(parse_rps_document("a eats b. b beats c. c beats a.").is_err());
    }

    #[test]
    fn redundancy_formula() {
        assert_eq!(redundancy_probability(0.0, 10.0, 24360.0, 4060.0).unwrap(), 0.0);
        assert_eq!(redundancy_probability(100.0, 10.0, 10.0, 1.0).unwrap(), 1.0);
        assert!(matches!(
            redundancy_probability(1.0, 0.0, 1.0, 1.0),
            Err(Error::DivisionDomain(_))
        ));
    }
}
