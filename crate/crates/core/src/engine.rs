//! Grid-world rules: placement, movement, pickup, monster moves, combat,
//! rewards and text observations.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::nlgen::{render_texts, TemplatePack};
use crate::rps::{make_rps_splits, rps_episode, DependencyGraph, RpsSplit};
use crate::worldgen::{
    load_catalog, sample_dynamics, split_assignments, DynamicsAssignment, EntityCatalog, EpisodeConfig, SplitId,
    SplitSpec, Task,
};

pub const EMPTY: &str = "empty";
pub const WALL: &str = "wall";
pub const AGENT: &str = "you";

/// Probability that a moving monster takes the chase branch.
pub const CHASE_PROBABILITY: f64 = 0.6;

/// Layouts drawn before giving up on finding a winnable placement.
const PLACEMENT_ATTEMPTS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn step(self, action: Action) -> Pos {
        let (dx, dy) = action.delta();
        Pos::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: Pos) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Stay,
}

impl Action {
    pub const ALL: [Action; 5] = [Action::Up, Action::Down, Action::Left, Action::Right, Action::Stay];
    pub const MOVES: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    /// Screen coordinates: `up` decreases y.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Stay => (0, 0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
            Action::Stay => "stay",
        }
    }

    pub fn index(self) -> usize {
        Action::ALL.iter().position(|&a| a == self).expect("closed set")
    }

    /// The move from `from` to the 4-neighbour `to`.
    pub fn between(from: Pos, to: Pos) -> Option<Action> {
        Action::ALL.into_iter().find(|&a| from.step(a) == to)
    }
}

impl std::str::FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown action {s:?}")))
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Wall,
    Empty,
    Monster(usize),
    Item(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonsterInstance {
    pub name: String,
    /// Element in the main task, beats-graph node in rock-paper-scissors.
    pub element: String,
    pub team: Option<String>,
    pub pos: Pos,
    pub is_target: bool,
}

impl MonsterInstance {
    pub fn phrase(&self) -> String {
        format!("{} {}", self.element, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemInstance {
    pub modifier: String,
    /// Absent for rock-paper-scissors items, which are named by type only.
    pub weapon: Option<String>,
    /// `None` while held.
    pub pos: Option<Pos>,
}

impl ItemInstance {
    pub fn phrase(&self) -> String {
        match &self.weapon {
            Some(w) => format!("{} {}", self.modifier, w),
            None => self.modifier.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "task")]
#[allow(clippy::large_enum_variant)]
pub enum Rules {
    Rtfm(DynamicsAssignment),
    Rps { graph: DependencyGraph },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ongoing,
    Win,
    LossCombat,
    LossTimeout,
}

impl Outcome {
    pub fn is_done(self) -> bool {
        self != Outcome::Ongoing
    }

    pub fn reward(self) -> f64 {
        match self {
            Outcome::Ongoing => 0.0,
            Outcome::Win => 1.0,
            Outcome::LossCombat | Outcome::LossTimeout => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombatResult {
    Win,
    Loss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initiator {
    Agent,
    Monster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contact {
    pub monster: usize,
    pub initiator: Initiator,
    pub result: CombatResult,
}

/// Win iff the monster is the target and the held item beats its element.
pub fn combat_outcome(monster: &MonsterInstance, inventory: Option<&ItemInstance>, rules: &Rules) -> CombatResult {
    let Some(item) = inventory else {
        return CombatResult::Loss;
    };
    let beats = match rules {
        Rules::Rtfm(a) => a.modifier_element.get(&item.modifier) == Some(&monster.element),
        Rules::Rps { graph } => {
            let (Some(x), Some(y)) = (single_char(&item.modifier), single_char(&monster.element)) else {
                return CombatResult::Loss;
            };
            graph.beats(x) == Some(y)
        }
    };
    if monster.is_target && beats {
        CombatResult::Win
    } else {
        CombatResult::Loss
    }
}

fn single_char(s: &str) -> Option<char> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

/// The episode RNG, serialized as its ChaCha seed, stream and word position.
#[derive(Debug, Clone)]
pub struct EpisodeRng(pub ChaCha8Rng);

#[derive(Serialize, Deserialize)]
struct RngParts {
    seed: [u8; 32],
    stream: u64,
    word_pos: u128,
}

impl EpisodeRng {
    fn parts(&self) -> RngParts {
        RngParts {
            seed: self.0.get_seed(),
            stream: self.0.get_stream(),
            word_pos: self.0.get_word_pos(),
        }
    }
}

impl PartialEq for EpisodeRng {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.parts(), other.parts());
        (a.seed, a.stream, a.word_pos) == (b.seed, b.stream, b.word_pos)
    }
}

impl Serialize for EpisodeRng {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts().serialize(s)
    }
}

impl<'de> Deserialize<'de> for EpisodeRng {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = RngParts::deserialize(d)?;
        let mut rng = ChaCha8Rng::from_seed(p.seed);
        rng.set_stream(p.stream);
        rng.set_word_pos(p.word_pos);
        Ok(EpisodeRng(rng))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub width: usize,
    pub height: usize,
    /// `cells[x][y]`: entity phrase, `wall`, `you` or `empty`.
    pub cells: Vec<Vec<String>>,
    pub doc: String,
    pub goal: String,
    pub inventory: String,
    pub frame: u32,
}

impl Observation {
    /// Grid rows with aligned columns, followed by goal, document and inventory.
    pub fn to_text(&self) -> String {
        let w = self
            .cells
            .iter()
            .flatten()
            .map(|c| c.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for y in 0..self.height {
            let row: Vec<String> = (0..self.width).map(|x| format!("{:<w$}", self.cells[x][y])).collect();
            out.push_str(row.join(" | ").trim_end());
            out.push('\n');
        }
        out.push_str(&format!(
            "goal: {}\ndoc: {}\ninventory: {}\nframe: {}\n",
            self.goal, self.doc, self.inventory, self.frame
        ));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub shaped_reward: f64,
    pub done: bool,
    pub outcome: Outcome,
    pub contact: Option<Contact>,
}

/// Result of one monster move decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub to: Pos,
    /// The chase branch was drawn.
    pub chased: bool,
    /// The chase branch found no distance-reducing move and moved uniformly.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub config: EpisodeConfig,
    pub rules: Rules,
    pub goal: String,
    pub doc: String,
    /// `grid[x][y]`; the agent is tracked separately in `agent`.
    pub grid: Vec<Vec<Cell>>,
    pub agent: Pos,
    /// Index into `items` of the held item.
    pub inventory: Option<usize>,
    pub monsters: Vec<MonsterInstance>,
    pub items: Vec<ItemInstance>,
    pub frame: u32,
    pub outcome: Outcome,
    pub rng: EpisodeRng,
    /// Layouts drawn at reset until a winnable one came up.
    pub placement_attempts: u32,
}

impl WorldState {
    /// Builds a state from explicit positions. Border cells are walls;
    /// `extra_walls` adds interior walls.
    #[allow(clippy::too_many_arguments)]
    pub fn from_layout(
        config: EpisodeConfig,
        rules: Rules,
        goal: String,
        doc: String,
        agent: Pos,
        monsters: Vec<MonsterInstance>,
        items: Vec<ItemInstance>,
        extra_walls: &[Pos],
        rng_seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let (w, h) = (config.width, config.height);
        let mut grid = vec![vec![Cell::Empty; h]; w];
        for (x, col) in grid.iter_mut().enumerate() {
            for (y, cell) in col.iter_mut().enumerate() {
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    *cell = Cell::Wall;
                }
            }
        }
        let mut state = WorldState {
            config,
            rules,
            goal,
            doc,
            grid,
            agent,
            inventory: None,
            monsters,
            items,
            frame: 0,
            outcome: Outcome::Ongoing,
            rng: EpisodeRng(ChaCha8Rng::seed_from_u64(rng_seed)),
            placement_attempts: 1,
        };
        let bad = |msg: String| Err(Error::InvalidConfig(format!("layout: {msg}")));
        for &p in extra_walls {
            if !state.in_bounds(p) {
                return bad(format!("wall {p:?} outside grid"));
            }
            state.grid[p.x as usize][p.y as usize] = Cell::Wall;
        }
        if !state.in_bounds(agent) || state.cell(agent) != Cell::Empty {
            return bad(format!("agent {agent:?} not on a free interior cell"));
        }
        let monster_pos: Vec<Pos> = state.monsters.iter().map(|m| m.pos).collect();
        for (i, p) in monster_pos.into_iter().enumerate() {
            if !state.in_bounds(p) || state.cell(p) != Cell::Empty || p == agent {
                return bad(format!("monster {i} at {p:?} overlaps"));
            }
            state.grid[p.x as usize][p.y as usize] = Cell::Monster(i);
        }
        let mut held = None;
        let item_pos: Vec<Option<Pos>> = state.items.iter().map(|it| it.pos).collect();
        for (i, p) in item_pos.into_iter().enumerate() {
            match p {
                Some(p) => {
                    if !state.in_bounds(p) || state.cell(p) != Cell::Empty || p == agent {
                        return bad(format!("item {i} at {p:?} overlaps"));
                    }
                    state.grid[p.x as usize][p.y as usize] = Cell::Item(i);
                }
                None if held.is_none() => held = Some(i),
                None => return bad("two held items".into()),
            }
        }
        state.inventory = held;
        if state.monsters.iter().filter(|m| m.is_target).count() != 1 {
            return bad("need exactly one target monster".into());
        }
        Ok(state)
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn height(&self) -> usize {
        self.config.height
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width() && (p.y as usize) < self.height()
    }

    /// Out-of-bounds positions read as walls.
    pub fn cell(&self, p: Pos) -> Cell {
        if self.in_bounds(p) {
            self.grid[p.x as usize][p.y as usize]
        } else {
            Cell::Wall
        }
    }

    fn set(&mut self, p: Pos, c: Cell) {
        self.grid[p.x as usize][p.y as usize] = c;
    }

    pub fn held_item(&self) -> Option<&ItemInstance> {
        self.inventory.map(|i| &self.items[i])
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_done()
    }

    pub fn render_observation(&self) -> Observation {
        let cells = (0..self.width())
            .map(|x| {
                (0..self.height())
                    .map(|y| {
                        let p = Pos::new(x as i32, y as i32);
                        if p == self.agent {
                            return AGENT.to_string();
                        }
                        match self.cell(p) {
                            Cell::Wall => WALL.to_string(),
                            Cell::Empty => EMPTY.to_string(),
                            Cell::Monster(i) => self.monsters[i].phrase(),
                            Cell::Item(i) => self.items[i].phrase(),
                        }
                    })
                    .collect()
            })
            .collect();
        Observation {
            width: self.width(),
            height: self.height(),
            cells,
            doc: self.doc.clone(),
            goal: self.goal.clone(),
            inventory: self.held_item().map_or_else(|| EMPTY.to_string(), ItemInstance::phrase),
            frame: self.frame,
        }
    }

    /// Moves a monster may make: stay, or a step onto an empty cell or the agent.
    pub fn legal_monster_moves(&self, monster: usize) -> Vec<(Action, Pos)> {
        let from = self.monsters[monster].pos;
        Action::ALL
            .into_iter()
            .map(|a| (a, from.step(a)))
            .filter(|&(a, p)| a == Action::Stay || p == self.agent || self.cell(p) == Cell::Empty)
            .collect()
    }

    fn combat(&mut self, monster: usize, initiator: Initiator) -> Contact {
        let result = combat_outcome(&self.monsters[monster], self.held_item(), &self.rules);
        self.outcome = match result {
            CombatResult::Win => Outcome::Win,
            CombatResult::Loss => Outcome::LossCombat,
        };
        Contact {
            monster,
            initiator,
            result,
        }
    }

    /// Agent moves first, then (with `dyna`) each monster in list order.
    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.is_done() {
            return Err(Error::SteppedAfterDone);
        }
        let mut contact = None;
        let from = self.agent;
        let to = from.step(action);
        match self.cell(to) {
            Cell::Wall => {}
            Cell::Empty => self.agent = to,
            Cell::Monster(i) => contact = Some(self.combat(i, Initiator::Agent)),
            Cell::Item(i) => {
                self.agent = to;
                self.set(to, Cell::Empty);
                if let Some(held) = self.inventory {
                    self.items[held].pos = Some(from);
                    self.set(from, Cell::Item(held));
                }
                self.items[i].pos = None;
                self.inventory = Some(i);
            }
        }
        if !self.is_done() && self.config.dyna {
            let mut rng = self.rng.0.clone();
            for i in 0..self.monsters.len() {
                let t = monster_transition(self, i, &mut rng);
                if t.to == self.agent {
                    contact = Some(self.combat(i, Initiator::Monster));
                    break;
                }
                let old = self.monsters[i].pos;
                if t.to != old {
                    self.set(old, Cell::Empty);
                    self.set(t.to, Cell::Monster(i));
                    self.monsters[i].pos = t.to;
                }
            }
            self.rng.0 = rng;
        }
        self.frame += 1;
        if !self.is_done() && self.frame >= self.config.max_frames {
            self.outcome = Outcome::LossTimeout;
        }
        let reward = self.outcome.reward();
        let shaped_reward = if self.is_done() {
            reward
        } else {
            reward + self.config.step_penalty
        };
        Ok(StepResult {
            observation: self.render_observation(),
            reward,
            shaped_reward,
            done: self.is_done(),
            outcome: self.outcome,
            contact,
        })
    }
}

/// Next position of `monster`. Without `dyna` monsters never move. With
/// probability [`CHASE_PROBABILITY`] a legal move that shortens the
/// Manhattan distance to the agent is drawn uniformly (uniform legal move
/// if none exists); otherwise any legal move, staying included.
pub fn monster_transition<R: Rng + ?Sized>(state: &WorldState, monster: usize, rng: &mut R) -> Transition {
    let here = state.monsters[monster].pos;
    if !state.config.dyna {
        return Transition {
            to: here,
            chased: false,
            fallback: false,
        };
    }
    let legal = state.legal_monster_moves(monster);
    let pick = |rng: &mut R, moves: &[(Action, Pos)]| moves.choose(rng).expect("stay is always legal").1;
    if rng.gen_bool(CHASE_PROBABILITY) {
        let d = here.manhattan(state.agent);
        let closer: Vec<(Action, Pos)> = legal
            .iter()
            .copied()
            .filter(|&(_, p)| p.manhattan(state.agent) < d)
            .collect();
        if closer.is_empty() {
            Transition {
                to: pick(rng, &legal),
                chased: true,
                fallback: true,
            }
        } else {
            Transition {
                to: pick(rng, &closer),
                chased: true,
                fallback: false,
            }
        }
    } else {
        Transition {
            to: pick(rng, &legal),
            chased: false,
            fallback: false,
        }
    }
}

/// Monster transition counts gathered by [`chase_statistic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChaseStats {
    pub transitions: u64,
    /// Transitions that drew the chase branch.
    pub chased: u64,
    /// Chase draws with no distance-reducing move available.
    pub fallback: u64,
    /// Non-fallback chase moves that failed to reduce the distance; always 0.
    pub chase_violations: u64,
}

impl ChaseStats {
    pub fn chase_fraction(&self) -> f64 {
        self.chased as f64 / self.transitions.max(1) as f64
    }
}

/// Samples `transitions` monster moves from states visited by episodes
/// played with uniformly random agent actions. Samples use their own
/// generator so the visited episodes are the ordinary seeded ones.
pub fn chase_statistic(env: &Environment, transitions: u64, seed: u64) -> Result<ChaseStats> {
    if !env.config.dyna {
        return Err(Error::InvalidConfig("chase statistic needs dyna".into()));
    }
    let mut stats = ChaseStats::default();
    let mut sampler = ChaCha8Rng::seed_from_u64(seed ^ 0xC4A5_E000);
    let mut episode = seed;
    while stats.transitions < transitions {
        let mut state = env.reset(episode)?;
        episode += 1;
        while !state.is_done() && stats.transitions < transitions {
            for i in 0..state.monsters.len() {
                let t = monster_transition(&state, i, &mut sampler);
                stats.transitions += 1;
                if t.chased {
                    stats.chased += 1;
                }
                if t.fallback {
                    stats.fallback += 1;
                } else if t.chased {
                    let here = state.monsters[i].pos;
                    if t.to.manhattan(state.agent) >= here.manhattan(state.agent) {
                        stats.chase_violations += 1;
                    }
                }
            }
            let action = *Action::ALL.choose(&mut sampler).expect("non-empty");
            state.step(action)?;
        }
    }
    Ok(stats)
}

/// Interior cells in row-major order.
pub fn interior_cells(width: usize, height: usize) -> Vec<Pos> {
    let mut out = Vec::new();
    for y in 1..height as i32 - 1 {
        for x in 1..width as i32 - 1 {
            out.push(Pos::new(x, y));
        }
    }
    out
}

/// Whether `to` can be reached from `from` over a border-walled grid without
/// crossing any of `blocked`.
fn reachable(width: usize, height: usize, from: Pos, to: Pos, blocked: &[Pos]) -> bool {
    let inside = |p: Pos| p.x >= 1 && p.y >= 1 && (p.x as usize) < width - 1 && (p.y as usize) < height - 1;
    let mut seen = vec![false; width * height];
    let mut queue = std::collections::VecDeque::from([from]);
    seen[from.y as usize * width + from.x as usize] = true;
    while let Some(p) = queue.pop_front() {
        if p == to {
            return true;
        }
        for a in Action::MOVES {
            let q = p.step(a);
            if !inside(q) || seen[q.y as usize * width + q.x as usize] {
                continue;
            }
            if q != to && blocked.contains(&q) {
                continue;
            }
            seen[q.y as usize * width + q.x as usize] = true;
            queue.push_back(q);
        }
    }
    false
}

/// Places `agent`, then monsters, then items on distinct interior cells,
/// redrawing until the agent can reach `winning_item` without crossing a
/// monster and from there the target without crossing a monster or another
/// item (stepping on one would swap the weapon away).
pub(crate) fn place<R: Rng + ?Sized>(
    rng: &mut R,
    config: &EpisodeConfig,
    monsters: usize,
    items: usize,
    winning_item: usize,
    target: usize,
) -> Result<(Pos, Vec<Pos>, Vec<Pos>, u32)> {
    let cells = interior_cells(config.width, config.height);
    for attempt in 1..=PLACEMENT_ATTEMPTS {
        let chosen: Vec<Pos> = cells.choose_multiple(rng, 1 + monsters + items).copied().collect();
        let agent = chosen[0];
        let m = chosen[1..1 + monsters].to_vec();
        let it = chosen[1 + monsters..].to_vec();
        let (w, h) = (config.width, config.height);
        let armed_blocked: Vec<Pos> = m
            .iter()
            .chain(
                it.iter()
                    .enumerate()
                    .filter(|&(i, _)| i != winning_item)
                    .map(|(_, p)| p),
            )
            .copied()
            .collect();
        if reachable(w, h, agent, it[winning_item], &m) && reachable(w, h, it[winning_item], m[target], &armed_blocked)
        {
            return Ok((agent, m, it, attempt));
        }
    }
    Err(Error::InvalidConfig("no winnable layout found".into()))
}

#[derive(Debug, Clone)]
enum Splits {
    Rtfm { train: SplitSpec, eval: SplitSpec },
    Rps(RpsSplit),
}

/// A configured environment: catalog, templates and splits, ready to reset.
#[derive(Debug, Clone)]
pub struct Environment {
    pub config: EpisodeConfig,
    pub catalog: Arc<EntityCatalog>,
    pub pack: Arc<TemplatePack>,
    splits: Splits,
}

impl Environment {
    pub fn new(config: EpisodeConfig) -> Result<Self> {
        Self::with_parts(config, load_catalog(), TemplatePack::standard())
    }

    pub fn with_parts(config: EpisodeConfig, catalog: EntityCatalog, pack: TemplatePack) -> Result<Self> {
        config.validate()?;
        let splits = match config.task {
            Task::Rtfm => {
                let (train, eval) = split_assignments(&catalog, config.eval_fraction, config.split_seed)?;
                Splits::Rtfm { train, eval }
            }
            Task::Rps(kind) => Splits::Rps(make_rps_splits(kind, config.split_seed)),
        };
        Ok(Environment {
            config,
            catalog: Arc::new(catalog),
            pack: Arc::new(pack),
            splits,
        })
    }

    /// The active main-task split, if this is a main-task environment.
    pub fn split(&self) -> Option<&SplitSpec> {
        match &self.splits {
            Splits::Rtfm { train, eval } => Some(match self.config.split {
                SplitId::Train => train,
                SplitId::Eval => eval,
            }),
            Splits::Rps(_) => None,
        }
    }

    pub fn splits(&self) -> Option<(&SplitSpec, &SplitSpec)> {
        match &self.splits {
            Splits::Rtfm { train, eval } => Some((train, eval)),
            Splits::Rps(_) => None,
        }
    }

    pub fn rps_split(&self) -> Option<&RpsSplit> {
        match &self.splits {
            Splits::Rps(s) => Some(s),
            Splits::Rtfm { .. } => None,
        }
    }

    /// Samples the episode for `seed`; the same seed always yields the same state.
    pub fn reset(&self, seed: u64) -> Result<WorldState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &self.splits {
            Splits::Rps(split) => rps_episode(&self.config, split, &self.catalog, &mut rng),
            Splits::Rtfm { .. } => {
                let split = self.split().expect("main task");
                let a = sample_dynamics(&mut rng, &self.config, &self.catalog, split)?;
                let texts = render_texts(&a, &mut rng, self.config.nl, &self.pack);
                let (agent, mpos, ipos, attempts) = place(&mut rng, &self.config, 2, 2, 0, 0)?;
                let monsters = vec![
                    MonsterInstance {
                        name: a.target_monster.clone(),
                        element: a.target_element.clone(),
                        team: Some(a.target_team.clone()),
                        pos: mpos[0],
                        is_target: true,
                    },
                    MonsterInstance {
                        name: a.distractor_monster.clone(),
                        element: a.distractor_element.clone(),
                        team: Some(a.distractor_team().to_string()),
                        pos: mpos[1],
                        is_target: false,
                    },
                ];
                let items = vec![
                    ItemInstance {
                        modifier: a.target_modifier.clone(),
                        weapon: Some(a.target_weapon.clone()),
                        pos: Some(ipos[0]),
                    },
                    ItemInstance {
                        modifier: a.distractor_modifier.clone(),
                        weapon: Some(a.distractor_weapon.clone()),
                        pos: Some(ipos[1]),
                    },
                ];
                let episode_seed = rng.gen::<u64>();
                let mut state = WorldState::from_layout(
                    self.config.clone(),
                    Rules::Rtfm(a),
                    texts.goal,
                    texts.document.text,
                    agent,
                    monsters,
                    items,
                    &[],
                    episode_seed,
                )?;
                state.placement_attempts = attempts;
                Ok(state)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_round_trip() {
        for a in Action::ALL {
            assert_eq!(a.as_str().parse::<Action>().unwrap(), a);
            assert_eq!(Action::ALL[a.index()], a);
        }
        assert!("jump".parse::<Action>().is_err());
        assert_eq!(Action::between(Pos::new(2, 2), Pos::new(2, 1)), Some(Action::Up));
        assert_eq!(Action::between(Pos::new(2, 2), Pos::new(4, 2)), None);
    }

    #[test]
    fn reset_places_entities() {
        let env = Environment::new(EpisodeConfig::default()).unwrap();
        let s = env.reset(5).unwrap();
        assert_eq!(s.monsters.len(), 2);
        assert_eq!(s.items.len(), 2);
        assert_eq!(s.frame, 0);
        assert_eq!(s.outcome, Outcome::Ongoing);
        assert!(s.inventory.is_none());
        let mut cells: Vec<Pos> = s.monsters.iter().map(|m| m.pos).collect();
        cells.extend(s.items.iter().map(|i| i.pos.unwrap()));
        cells.push(s.agent);
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), 5);
        let obs = s.render_observation();
        assert_eq!(obs.cells.len(), 6);
        assert!(obs.cells.iter().all(|c| c.len() == 6));
        assert_eq!(obs.inventory, EMPTY);
    }

    #[test]
    fn rng_state_round_trips() {
        let env = Environment::new(EpisodeConfig::default()).unwrap();
        let s = env.reset(9).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: WorldState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn stepping_after_done_fails() {
        let env = Environment::new(EpisodeConfig {
            max_frames: 1,
            ..Default::default()
        })
        .unwrap();
        let mut s = env.reset(1).unwrap();
        let r = s.step(Action::Stay).unwrap();
        assert!(r.done);
        assert_eq!(r.outcome, Outcome::LossTimeout);
        assert_eq!(r.reward, -1.0);
        assert!(matches!(s.step(Action::Stay), Err(Error::SteppedAfterDone)));
    }
}
