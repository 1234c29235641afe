//! Scripted policies that act from [`Observation`]s alone: a document-reading
//! oracle, three baselines, breadth-first pathfinding and a batch evaluator.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Action, Cell, Environment, Observation, Outcome, Pos, WorldState, AGENT, EMPTY, WALL};
use crate::error::{Error, Result};
use crate::nlgen::{extract_assignment, ParsedDynamics, TemplatePack};
use crate::rps::{parse_rps_document, DependencyGraph};
use crate::worldgen::EntityCatalog;

pub trait Policy: Send {
    fn act(&mut self, obs: &Observation) -> Result<Action>;
    fn tag(&self) -> &'static str;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeenMonster {
    pub pos: Pos,
    pub name: String,
    pub element: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeenItem {
    pub pos: Pos,
    pub phrase: String,
    pub modifier: String,
}

/// Walls and entities of one frame, as read from cell text or from a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    pub walls: Vec<bool>,
    pub agent: Pos,
    pub monsters: Vec<SeenMonster>,
    pub items: Vec<SeenItem>,
}

/// Modifier of an item phrase: everything before the weapon, or the whole
/// phrase for single-word items.
fn item_modifier(phrase: &str) -> String {
    match phrase.rsplit_once(' ') {
        Some((m, _)) => m.to_string(),
        None => phrase.to_string(),
    }
}

impl GridMap {
    /// A cell whose last word is a catalog monster is a monster; any other
    /// non-wall, non-empty cell is an item.
    pub fn from_observation(obs: &Observation, catalog: &EntityCatalog) -> Result<Self> {
        let (w, h) = (obs.width, obs.height);
        let mut map = GridMap {
            width: w,
            height: h,
            walls: vec![false; w * h],
            agent: Pos::new(-1, -1),
            monsters: Vec::new(),
            items: Vec::new(),
        };
        for (x, col) in obs.cells.iter().enumerate() {
            for (y, text) in col.iter().enumerate() {
                let pos = Pos::new(x as i32, y as i32);
                match text.as_str() {
                    WALL => map.walls[y * w + x] = true,
                    EMPTY => {}
                    AGENT => map.agent = pos,
                    phrase => match phrase.rsplit_once(' ') {
                        Some((element, name)) if catalog.monsters.iter().any(|m| m == name) => {
                            map.monsters.push(SeenMonster {
                                pos,
                                name: name.to_string(),
                                element: element.to_string(),
                            })
                        }
                        _ => map.items.push(SeenItem {
                            pos,
                            phrase: phrase.to_string(),
                            modifier: item_modifier(phrase),
                        }),
                    },
                }
            }
        }
        if map.agent.x < 0 {
            return Err(Error::NoPlan("agent not visible".into()));
        }
        Ok(map)
    }

    /// Entities are listed in the same column-major scan order as
    /// [`GridMap::from_observation`].
    pub fn from_state(state: &WorldState) -> Self {
        let (w, h) = (state.width(), state.height());
        let mut walls = vec![false; w * h];
        for x in 0..w {
            for y in 0..h {
                walls[y * w + x] = state.grid[x][y] == Cell::Wall;
            }
        }
        let mut map = GridMap {
            width: w,
            height: h,
            walls,
            agent: state.agent,
            monsters: state
                .monsters
                .iter()
                .map(|m| SeenMonster {
                    pos: m.pos,
                    name: m.name.clone(),
                    element: m.element.clone(),
                })
                .collect(),
            items: state
                .items
                .iter()
                .filter_map(|it| {
                    it.pos.map(|pos| SeenItem {
                        pos,
                        phrase: it.phrase(),
                        modifier: it.modifier.clone(),
                    })
                })
                .collect(),
        };
        map.monsters.sort_by_key(|m| (m.pos.x, m.pos.y));
        map.items.sort_by_key(|i| (i.pos.x, i.pos.y));
        map
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    pub fn is_wall(&self, p: Pos) -> bool {
        !self.in_bounds(p) || self.walls[p.y as usize * self.width + p.x as usize]
    }

    pub fn monster_at(&self, p: Pos) -> bool {
        self.monsters.iter().any(|m| m.pos == p)
    }

    pub fn item_at(&self, p: Pos) -> bool {
        self.items.iter().any(|i| i.pos == p)
    }

    /// [`bfs_path`] over this map's walls and monsters.
    pub fn path(&self, from: Pos, to: Pos, avoid: &HashSet<Pos>) -> Option<Vec<Pos>> {
        let monsters: HashSet<Pos> = self.monsters.iter().map(|m| m.pos).collect();
        bfs_path(self.width, self.height, |p| self.is_wall(p), &monsters, from, to, avoid)
    }
}

/// Shortest 4-connected path from `from` to `to`, excluding `from` and
/// ending at `to`. Walls, monsters and `avoid` are impassable except at the
/// destination. Neighbours are expanded up, down, left, right, so ties go
/// to the earliest direction.
pub fn bfs_path(
    width: usize,
    height: usize,
    is_wall: impl Fn(Pos) -> bool,
    monsters: &HashSet<Pos>,
    from: Pos,
    to: Pos,
    avoid: &HashSet<Pos>,
) -> Option<Vec<Pos>> {
    let inside = |p: Pos| p.x >= 0 && p.y >= 0 && (p.x as usize) < width && (p.y as usize) < height;
    if !inside(from) || !inside(to) {
        return None;
    }
    let idx = |p: Pos| p.y as usize * width + p.x as usize;
    let mut parent: Vec<Option<Pos>> = vec![None; width * height];
    let mut seen = vec![false; width * height];
    seen[idx(from)] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(p) = queue.pop_front() {
        if p == to {
            let mut path = vec![p];
            let mut cur = p;
            while let Some(prev) = parent[idx(cur)] {
                if prev == from {
                    break;
                }
                path.push(prev);
                cur = prev;
            }
            if p == from {
                return Some(Vec::new());
            }
            path.reverse();
            return Some(path);
        }
        for a in Action::MOVES {
            let q = p.step(a);
            if !inside(q) || seen[idx(q)] {
                continue;
            }
            if q != to && (is_wall(q) || monsters.contains(&q) || avoid.contains(&q)) {
                continue;
            }
            if q == to && is_wall(q) {
                continue;
            }
            seen[idx(q)] = true;
            parent[idx(q)] = Some(p);
            queue.push_back(q);
        }
    }
    None
}

/// What a reading agent learned from the document and goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Knowledge {
    Rtfm(ParsedDynamics),
    Rps(DependencyGraph),
}

/// Document and goal reader shared by the agents.
#[derive(Debug, Clone)]
pub struct Reader {
    pub catalog: Arc<EntityCatalog>,
    pub pack: Arc<TemplatePack>,
}

impl Reader {
    pub fn new(catalog: Arc<EntityCatalog>, pack: Arc<TemplatePack>) -> Self {
        Reader { catalog, pack }
    }

    pub fn for_env(env: &Environment) -> Self {
        Reader::new(env.catalog.clone(), env.pack.clone())
    }

    pub fn read(&self, obs: &Observation) -> Result<Knowledge> {
        match extract_assignment(&obs.doc, &obs.goal, &self.catalog, &self.pack) {
            Ok(parsed) => Ok(Knowledge::Rtfm(parsed)),
            Err(first) => parse_rps_document(&obs.doc)
                .map(Knowledge::Rps)
                .map_err(|_| Error::NoPlan(format!("unreadable document: {first}"))),
        }
    }
}

/// The monster to defeat and the modifiers that beat it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetInfo {
    pub target: SeenMonster,
    pub winning_modifiers: Vec<String>,
}

/// Steps 1 to 4 of the reading procedure: target team, its monsters, the
/// one present in the world, its element, and the modifiers beating it.
pub fn identify_target(knowledge: &Knowledge, map: &GridMap) -> Result<TargetInfo> {
    match knowledge {
        Knowledge::Rtfm(p) => {
            let target = map
                .monsters
                .iter()
                .find(|m| p.monster_team.get(&m.name) == Some(&p.target_team))
                .ok_or_else(|| Error::NoPlan(format!("no monster of {} visible", p.target_team)))?;
            let winning_modifiers = p
                .modifier_element
                .iter()
                .filter(|(_, e)| **e == target.element)
                .map(|(m, _)| m.clone())
                .collect();
            Ok(TargetInfo {
                target: target.clone(),
                winning_modifiers,
            })
        }
        Knowledge::Rps(g) => {
            let target = map
                .monsters
                .first()
                .ok_or_else(|| Error::NoPlan("no monster visible".into()))?;
            let ty = target.element.chars().next().unwrap_or(' ');
            let winner = g
                .beaten_by(ty)
                .ok_or_else(|| Error::NoPlan(format!("type {ty} not in the document")))?;
            Ok(TargetInfo {
                target: target.clone(),
                winning_modifiers: vec![winner.to_string()],
            })
        }
    }
}

fn around(points: &[Pos], radius: i32) -> HashSet<Pos> {
    let mut out = HashSet::new();
    for p in points {
        for dx in -radius..=radius {
            for dy in -radius..=radius {
                if dx.abs() + dy.abs() <= radius {
                    out.insert(Pos::new(p.x + dx, p.y + dy));
                }
            }
        }
    }
    out
}

/// Executes the reading procedure each frame: read, find the target and a
/// beating item, walk to the item, then to the target. With `cautious`
/// (moving monsters) cells next to dangerous monsters are avoided when a
/// detour exists.
#[derive(Debug, Clone)]
pub struct Oracle {
    reader: Reader,
    cautious: bool,
    knowledge: Option<Knowledge>,
}

/// What the oracle decided on the last frame, for inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OraclePlan {
    pub target: Pos,
    pub goal: Pos,
    pub armed: bool,
    pub chosen_item: Option<String>,
    pub waypoints: Vec<Pos>,
}

impl Oracle {
    pub fn new(reader: Reader, cautious: bool) -> Self {
        Oracle {
            reader,
            cautious,
            knowledge: None,
        }
    }

    pub fn for_env(env: &Environment) -> Self {
        Oracle::new(Reader::for_env(env), env.config.dyna)
    }

    fn knowledge(&mut self, obs: &Observation) -> Result<&Knowledge> {
        if self.knowledge.is_none() {
            self.knowledge = Some(self.reader.read(obs)?);
        }
        Ok(self.knowledge.as_ref().expect("set above"))
    }

    /// Full plan for this frame, or `NoPlan`.
    pub fn plan(&mut self, obs: &Observation) -> Result<(Action, OraclePlan)> {
        let map = GridMap::from_observation(obs, &self.reader.catalog)?;
        let info = identify_target(self.knowledge(obs)?, &map)?;
        let held = (obs.inventory != EMPTY).then(|| item_modifier(&obs.inventory));
        let armed = held.as_ref().is_some_and(|m| info.winning_modifiers.contains(m));
        let mut danger: Vec<Pos> = map
            .monsters
            .iter()
            .filter(|m| m.pos != info.target.pos)
            .map(|m| m.pos)
            .collect();
        if !armed {
            danger.push(info.target.pos);
        }

        let (goal, chosen_item) = if armed {
            (info.target.pos, None)
        } else {
            let free = HashSet::new();
            let best = map
                .items
                .iter()
                .filter(|it| info.winning_modifiers.contains(&it.modifier))
                .filter_map(|it| map.path(map.agent, it.pos, &free).map(|p| (p.len(), it)))
                .min_by_key(|(len, it)| (*len, it.pos));
            match best {
                Some((_, it)) => (it.pos, Some(it.phrase.clone())),
                None => {
                    let any = map
                        .items
                        .iter()
                        .find(|it| info.winning_modifiers.contains(&it.modifier));
                    match any {
                        Some(it) if self.cautious => (it.pos, Some(it.phrase.clone())),
                        Some(_) => return Err(Error::NoPlan("beating item unreachable".into())),
                        None => return Err(Error::NoPlan("no beating item in the world".into())),
                    }
                }
            }
        };

        let items: HashSet<Pos> = map.items.iter().map(|i| i.pos).filter(|&p| p != goal).collect();
        let mut near: HashSet<Pos> = if self.cautious {
            around(&danger, 1)
        } else {
            HashSet::new()
        };
        near.remove(&goal);
        let soft: HashSet<Pos> = items.union(&near).copied().collect();
        let hard: HashSet<Pos> = if armed { items.clone() } else { HashSet::new() };

        let mut plan = OraclePlan {
            target: info.target.pos,
            goal,
            armed,
            chosen_item,
            waypoints: Vec::new(),
        };
        let step = |path: &[Pos]| Action::between(map.agent, path[0]).expect("adjacent");
        if let Some(p) = map.path(map.agent, goal, &soft) {
            let a = step(&p);
            plan.waypoints = p;
            return Ok((a, plan));
        }
        if let Some(p) = map.path(map.agent, goal, &hard) {
            if !self.cautious || !near.contains(&p[0]) {
                let a = step(&p);
                plan.waypoints = p;
                return Ok((a, plan));
            }
        } else if !self.cautious {
            return Err(Error::NoPlan("path blocked".into()));
        }
        Ok((evade(&map, &danger, armed), plan))
    }
}

/// The move (staying last) that keeps farthest from `danger` without
/// entering a monster, a wall or, when `armed`, an item.
fn evade(map: &GridMap, danger: &[Pos], armed: bool) -> Action {
    let mut order = Action::MOVES.to_vec();
    order.push(Action::Stay);
    order
        .into_iter()
        .filter(|&a| {
            let p = map.agent.step(a);
            a == Action::Stay || !(map.is_wall(p) || map.monster_at(p) || (armed && map.item_at(p)))
        })
        .max_by_key(|&a| {
            let p = map.agent.step(a);
            let d = danger.iter().map(|&m| m.manhattan(p)).min().unwrap_or(i32::MAX);
            // Keep the first action among equals: max_by_key returns the last.
            (d, std::cmp::Reverse(a.index()))
        })
        .unwrap_or(Action::Stay)
}

impl Policy for Oracle {
    fn act(&mut self, obs: &Observation) -> Result<Action> {
        self.plan(obs).map(|(a, _)| a)
    }

    fn tag(&self) -> &'static str {
        "oracle"
    }
}

pub struct UniformRandom {
    rng: ChaCha8Rng,
}

impl UniformRandom {
    pub fn new(seed: u64) -> Self {
        UniformRandom {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for UniformRandom {
    fn act(&mut self, _obs: &Observation) -> Result<Action> {
        Ok(*Action::ALL.choose(&mut self.rng).expect("non-empty"))
    }

    fn tag(&self) -> &'static str {
        "uniform_random"
    }
}

fn toward(map: &GridMap, goal: Pos, avoid: &HashSet<Pos>) -> Action {
    map.path(map.agent, goal, avoid)
        .and_then(|p| p.first().and_then(|&q| Action::between(map.agent, q)))
        .unwrap_or(Action::Stay)
}

/// Picks up a uniformly chosen item, then attacks the target monster.
pub struct RandomItemThenTarget {
    reader: Reader,
    rng: ChaCha8Rng,
    knowledge: Option<Knowledge>,
    chosen: Option<String>,
}

impl RandomItemThenTarget {
    pub fn new(reader: Reader, seed: u64) -> Self {
        RandomItemThenTarget {
            reader,
            rng: ChaCha8Rng::seed_from_u64(seed),
            knowledge: None,
            chosen: None,
        }
    }
}

impl Policy for RandomItemThenTarget {
    fn act(&mut self, obs: &Observation) -> Result<Action> {
        let map = GridMap::from_observation(obs, &self.reader.catalog)?;
        if self.knowledge.is_none() {
            self.knowledge = Some(self.reader.read(obs)?);
        }
        let info = identify_target(self.knowledge.as_ref().expect("set"), &map)?;
        if self.chosen.is_none() {
            let it = map
                .items
                .choose(&mut self.rng)
                .ok_or_else(|| Error::NoPlan("no items".into()))?;
            self.chosen = Some(it.phrase.clone());
        }
        let chosen = self.chosen.as_deref().expect("set");
        let items: HashSet<Pos> = map.items.iter().map(|i| i.pos).collect();
        if obs.inventory == chosen {
            return Ok(toward(&map, info.target.pos, &items));
        }
        match map.items.iter().find(|i| i.phrase == chosen) {
            Some(it) => {
                let others: HashSet<Pos> = items.iter().copied().filter(|&p| p != it.pos).collect();
                let a = toward(&map, it.pos, &others);
                Ok(if a == Action::Stay {
                    toward(&map, it.pos, &HashSet::new())
                } else {
                    a
                })
            }
            None => Ok(toward(&map, info.target.pos, &items)),
        }
    }

    fn tag(&self) -> &'static str {
        "random_item_then_target"
    }
}

/// Walks straight to the target without picking anything up.
pub struct UnarmedAttacker {
    reader: Reader,
    knowledge: Option<Knowledge>,
}

impl UnarmedAttacker {
    pub fn new(reader: Reader) -> Self {
        UnarmedAttacker {
            reader,
            knowledge: None,
        }
    }
}

impl Policy for UnarmedAttacker {
    fn act(&mut self, obs: &Observation) -> Result<Action> {
        let map = GridMap::from_observation(obs, &self.reader.catalog)?;
        if self.knowledge.is_none() {
            self.knowledge = Some(self.reader.read(obs)?);
        }
        let info = identify_target(self.knowledge.as_ref().expect("set"), &map)?;
        let items: HashSet<Pos> = map.items.iter().map(|i| i.pos).collect();
        Ok(toward(&map, info.target.pos, &items))
    }

    fn tag(&self) -> &'static str {
        "unarmed_attacker"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Oracle,
    UniformRandom,
    RandomItem,
    Unarmed,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::Oracle,
        AgentKind::UniformRandom,
        AgentKind::RandomItem,
        AgentKind::Unarmed,
    ];

    /// A fresh agent for one episode; `seed` drives any agent randomness.
    pub fn build(self, env: &Environment, seed: u64) -> Box<dyn Policy> {
        let agent_seed = seed ^ 0x5EED_A6E7_0000_0000;
        match self {
            AgentKind::Oracle => Box::new(Oracle::for_env(env)),
            AgentKind::UniformRandom => Box::new(UniformRandom::new(agent_seed)),
            AgentKind::RandomItem => Box::new(RandomItemThenTarget::new(Reader::for_env(env), agent_seed)),
            AgentKind::Unarmed => Box::new(UnarmedAttacker::new(Reader::for_env(env))),
        }
    }
}

/// One played episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub outcome: Outcome,
    pub frames: u32,
    /// The agent reported `NoPlan` at least once and stayed put instead.
    pub no_plan: bool,
}

/// Plays `seed` to the end. A `NoPlan` from the agent turns into `stay`.
pub fn run_episode(env: &Environment, agent: &mut dyn Policy, seed: u64) -> Result<EpisodeRecord> {
    let mut state = env.reset(seed)?;
    let mut obs = state.render_observation();
    let mut record = EpisodeRecord {
        seed,
        actions: Vec::new(),
        rewards: Vec::new(),
        outcome: Outcome::Ongoing,
        frames: 0,
        no_plan: false,
    };
    while !state.is_done() {
        let action = match agent.act(&obs) {
            Ok(a) => a,
            Err(Error::NoPlan(_)) => {
                record.no_plan = true;
                Action::Stay
            }
            Err(e) => return Err(e),
        };
        let r = state.step(action)?;
        record.actions.push(action);
        record.rewards.push(r.reward);
        obs = r.observation;
    }
    record.outcome = state.outcome;
    record.frames = state.frame;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub outcome: Outcome,
    pub frames: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinStats {
    pub episodes: usize,
    pub wins: usize,
    pub win_rate: f64,
    pub mean_frames: f64,
    pub no_plan: usize,
    pub by_seed: Vec<SeedResult>,
}

impl WinStats {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let episodes = records.len();
        let wins = records.iter().filter(|r| r.outcome == Outcome::Win).count();
        let frames: u64 = records.iter().map(|r| r.frames as u64).sum();
        WinStats {
            episodes,
            wins,
            win_rate: if episodes == 0 {
                0.0
            } else {
                wins as f64 / episodes as f64
            },
            mean_frames: if episodes == 0 {
                0.0
            } else {
                frames as f64 / episodes as f64
            },
            no_plan: records.iter().filter(|r| r.no_plan).count(),
            by_seed: records
                .iter()
                .map(|r| SeedResult {
                    seed: r.seed,
                    outcome: r.outcome,
                    frames: r.frames,
                })
                .collect(),
        }
    }
}

/// Plays seeds `seed..seed + episodes` in parallel, one fresh agent each.
pub fn play_episodes(kind: AgentKind, env: &Environment, episodes: usize, seed: u64) -> Result<Vec<EpisodeRecord>> {
    if episodes == 0 {
        return Err(Error::InvalidConfig("episodes must be at least 1".into()));
    }
    (0..episodes as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed + i;
            let mut agent = kind.build(env, s);
            run_episode(env, agent.as_mut(), s)
        })
        .collect()
}

pub fn evaluate_agent(kind: AgentKind, env: &Environment, episodes: usize, seed: u64) -> Result<WinStats> {
    Ok(WinStats::from_records(&play_episodes(kind, env, episodes, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(w: usize, h: usize) -> impl Fn(Pos) -> bool {
        move |p: Pos| p.x <= 0 || p.y <= 0 || p.x as usize >= w - 1 || p.y as usize >= h - 1
    }

    #[test]
    fn adjacent_path_has_length_one() {
        let none = HashSet::new();
        let p = bfs_path(5, 5, open(5, 5), &none, Pos::new(1, 1), Pos::new(2, 1), &none).unwrap();
        assert_eq!(p, vec![Pos::new(2, 1)]);
        let same = bfs_path(5, 5, open(5, 5), &none, Pos::new(1, 1), Pos::new(1, 1), &none).unwrap();
        assert!(same.is_empty());
    }

    #[test]
    fn walled_target_has_no_path() {
        let none = HashSet::new();
        let walls: HashSet<Pos> = [Pos::new(2, 1), Pos::new(1, 2), Pos::new(3, 2), Pos::new(2, 3)].into();
        let is_wall = |p: Pos| open(5, 5)(p) || walls.contains(&p);
        assert!(bfs_path(5, 5, is_wall, &none, Pos::new(1, 1), Pos::new(2, 2), &none).is_none());
    }

    #[test]
    fn ties_prefer_up_then_down_then_left() {
        let none = HashSet::new();
        let p = bfs_path(6, 6, open(6, 6), &none, Pos::new(2, 2), Pos::new(3, 1), &none).unwrap();
        assert_eq!(p, vec![Pos::new(2, 1), Pos::new(3, 1)]);
    }

    #[test]
    fn monsters_block_except_at_destination() {
        let none = HashSet::new();
        let monsters: HashSet<Pos> = [Pos::new(2, 1)].into();
        let p = bfs_path(5, 4, open(5, 4), &monsters, Pos::new(1, 1), Pos::new(3, 1), &none).unwrap();
        assert_eq!(p.len(), 4);
        let p = bfs_path(5, 4, open(5, 4), &monsters, Pos::new(1, 1), Pos::new(2, 1), &none).unwrap();
        assert_eq!(p, vec![Pos::new(2, 1)]);
    }

    #[test]
    fn item_modifiers() {
        assert_eq!(item_modifier("Grandmaster's sword"), "Grandmaster's");
        assert_eq!(item_modifier("a"), "a");
    }
}
