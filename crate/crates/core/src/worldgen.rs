//! Entity catalog, per-episode dynamics sampling, train/eval splits over
//! monster-team-modifier-element tuples, and closed-form space counts.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rps::RpsKind;

pub const MONSTERS: [&str; 9] = [
    "wolf", "jaguar", "panther", "goblin", "bat", "imp", "shaman", "ghost", "zombie",
];
pub const WEAPONS: [&str; 8] = [
    "sword",
    "axe",
    "morningstar",
    "polearm",
    "knife",
    "katana",
    "cutlass",
    "spear",
];
pub const ELEMENTS: [&str; 4] = ["cold", "fire", "lightning", "poison"];
pub const MODIFIERS: [&str; 8] = [
    "Grandmaster's",
    "blessed",
    "shimmering",
    "gleaming",
    "fanatical",
    "mysterious",
    "Soldier's",
    "arcane",
];
pub const TEAMS: [&str; 3] = ["Star Alliance", "Order of the Forest", "Rebel Enclave"];

/// Version of the split audit document written by [`SplitAudit`].
pub const SPLIT_AUDIT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCatalog {
    pub monsters: Vec<String>,
    pub weapons: Vec<String>,
    pub elements: Vec<String>,
    pub modifiers: Vec<String>,
    pub teams: Vec<String>,
}

pub fn load_catalog() -> EntityCatalog {
    let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
    EntityCatalog {
        monsters: own(&MONSTERS),
        weapons: own(&WEAPONS),
        elements: own(&ELEMENTS),
        modifiers: own(&MODIFIERS),
        teams: own(&TEAMS),
    }
}

impl EntityCatalog {
    /// Validates that every list is non-empty and all names are distinct.
    pub fn custom(
        monsters: Vec<String>,
        weapons: Vec<String>,
        elements: Vec<String>,
        modifiers: Vec<String>,
        teams: Vec<String>,
    ) -> Result<Self> {
        let catalog = EntityCatalog {
            monsters,
            weapons,
            elements,
            modifiers,
            teams,
        };
        let mut seen = BTreeSet::new();
        for (kind, list) in catalog.lists() {
            if list.is_empty() {
                return Err(Error::InvalidCatalog(format!("no {kind}")));
            }
            for name in list {
                if name.trim().is_empty() || name.contains('.') {
                    return Err(Error::InvalidCatalog(format!("bad {kind} name {name:?}")));
                }
                if !seen.insert(name.as_str()) {
                    return Err(Error::InvalidCatalog(format!("duplicate name {name:?}")));
                }
            }
        }
        Ok(catalog)
    }

    /// The first `n` entries of each list.
    pub fn reduced(
        &self,
        monsters: usize,
        weapons: usize,
        elements: usize,
        modifiers: usize,
        teams: usize,
    ) -> Result<Self> {
        let take = |xs: &[String], n: usize| xs[..n.min(xs.len())].to_vec();
        Self::custom(
            take(&self.monsters, monsters),
            take(&self.weapons, weapons),
            take(&self.elements, elements),
            take(&self.modifiers, modifiers),
            take(&self.teams, teams),
        )
    }

    pub fn lists(&self) -> [(&'static str, &[String]); 5] {
        [
            ("monsters", &self.monsters),
            ("weapons", &self.weapons),
            ("elements", &self.elements),
            ("modifiers", &self.modifiers),
            ("teams", &self.teams),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsAssignment {
    pub monster_team: BTreeMap<String, String>,
    /// Modifier to the element it beats.
    pub modifier_element: BTreeMap<String, String>,
    pub target_team: String,
    pub target_monster: String,
    pub target_element: String,
    pub target_modifier: String,
    pub target_weapon: String,
    pub distractor_monster: String,
    pub distractor_element: String,
    pub distractor_modifier: String,
    pub distractor_weapon: String,
}

impl DynamicsAssignment {
    pub fn distractor_team(&self) -> &str {
        &self.monster_team[&self.distractor_monster]
    }

    pub fn tuples(&self) -> [AssignmentTuple; 2] {
        [
            AssignmentTuple {
                monster: self.target_monster.clone(),
                team: self.target_team.clone(),
                modifier: self.target_modifier.clone(),
                element: self.target_element.clone(),
            },
            AssignmentTuple {
                monster: self.distractor_monster.clone(),
                team: self.distractor_team().to_string(),
                modifier: self.distractor_modifier.clone(),
                element: self.distractor_element.clone(),
            },
        ]
    }

    /// Monsters of `team` in name order.
    pub fn team_members(&self, team: &str) -> Vec<&str> {
        self.monster_team
            .iter()
            .filter(|(_, t)| t.as_str() == team)
            .map(|(m, _)| m.as_str())
            .collect()
    }

    /// Modifiers that beat `element` in name order.
    pub fn modifiers_beating(&self, element: &str) -> Vec<&str> {
        self.modifier_element
            .iter()
            .filter(|(_, e)| e.as_str() == element)
            .map(|(m, _)| m.as_str())
            .collect()
    }

    pub fn check_invariants(&self, catalog: &EntityCatalog) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("assignment: {msg}")));
        for (m, t) in &self.monster_team {
            if !catalog.monsters.contains(m) || !catalog.teams.contains(t) {
                return bad("monster or team outside the catalog");
            }
        }
        for (d, e) in &self.modifier_element {
            if !catalog.modifiers.contains(d) || !catalog.elements.contains(e) {
                return bad("modifier or element outside the catalog");
            }
        }
        if !catalog.weapons.contains(&self.target_weapon) || !catalog.weapons.contains(&self.distractor_weapon) {
            return bad("weapon outside the catalog");
        }
        if self.monster_team.get(&self.target_monster) != Some(&self.target_team) {
            return bad("target monster not on the target team");
        }
        match self.monster_team.get(&self.distractor_monster) {
            Some(t) if *t != self.target_team => {}
            _ => return bad("distractor monster on the target team"),
        }
        if self.modifier_element.get(&self.target_modifier) != Some(&self.target_element) {
            return bad("target modifier does not beat the target element");
        }
        if self.modifier_element.get(&self.distractor_modifier) != Some(&self.distractor_element) {
            return bad("distractor modifier does not beat the distractor element");
        }
        if (&self.target_modifier, &self.target_weapon) == (&self.distractor_modifier, &self.distractor_weapon) {
            return bad("target and distractor items coincide");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitId {
    Train,
    Eval,
}

impl std::fmt::Display for SplitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitId::Train => "train",
            SplitId::Eval => "eval",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AssignmentTuple {
    pub monster: String,
    pub team: String,
    pub modifier: String,
    pub element: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub split_id: SplitId,
    pub seed: u64,
    pub eval_fraction: f64,
    pub members: BTreeSet<AssignmentTuple>,
}

impl SplitSpec {
    pub fn contains(&self, t: &AssignmentTuple) -> bool {
        self.members.contains(t)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in `[0, 1)` for a catalog-index tuple under `seed`.
pub fn split_hash(seed: u64, indices: [usize; 4]) -> f64 {
    let h = indices
        .iter()
        .fold(splitmix64(seed), |h, &i| splitmix64(h ^ (i as u64).wrapping_add(1)));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Every (monster, team, modifier, element) combination of the catalog.
pub fn all_tuples(catalog: &EntityCatalog) -> Vec<(AssignmentTuple, [usize; 4])> {
    let mut out = Vec::new();
    for (mi, m) in catalog.monsters.iter().enumerate() {
        for (ti, t) in catalog.teams.iter().enumerate() {
            for (di, d) in catalog.modifiers.iter().enumerate() {
                for (ei, e) in catalog.elements.iter().enumerate() {
                    let tuple = AssignmentTuple {
                        monster: m.clone(),
                        team: t.clone(),
                        modifier: d.clone(),
                        element: e.clone(),
                    };
                    out.push((tuple, [mi, ti, di, ei]));
                }
            }
        }
    }
    out
}

/// Partitions the tuple space by a seeded hash: a tuple is held out for
/// eval when its hash falls below `eval_fraction`.
pub fn split_assignments(catalog: &EntityCatalog, eval_fraction: f64, seed: u64) -> Result<(SplitSpec, SplitSpec)> {
    if !(0.0..=1.0).contains(&eval_fraction) {
        return Err(Error::InvalidConfig(format!(
            "eval_fraction {eval_fraction} outside [0, 1]"
        )));
    }
    let mut train = BTreeSet::new();
    let mut eval = BTreeSet::new();
    for (tuple, idx) in all_tuples(catalog) {
        if split_hash(seed, idx) < eval_fraction {
            eval.insert(tuple);
        } else {
            train.insert(tuple);
        }
    }
    let spec = |split_id, members| SplitSpec {
        split_id,
        seed,
        eval_fraction,
        members,
    };
    Ok((spec(SplitId::Train, train), spec(SplitId::Eval, eval)))
}

/// Versioned JSON document listing both halves of a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAudit {
    pub version: u32,
    pub catalog: EntityCatalog,
    pub seed: u64,
    pub eval_fraction: f64,
    pub train: Vec<AssignmentTuple>,
    pub eval: Vec<AssignmentTuple>,
}

impl SplitAudit {
    pub fn new(catalog: &EntityCatalog, train: &SplitSpec, eval: &SplitSpec) -> Self {
        SplitAudit {
            version: SPLIT_AUDIT_VERSION,
            catalog: catalog.clone(),
            seed: train.seed,
            eval_fraction: train.eval_fraction,
            train: train.members.iter().cloned().collect(),
            eval: eval.members.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "split")]
pub enum Task {
    Rtfm,
    Rps(RpsKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub width: usize,
    pub height: usize,
    pub dyna: bool,
    pub group: bool,
    pub nl: bool,
    pub max_frames: u32,
    pub step_penalty: f64,
    pub discount: f64,
    pub split: SplitId,
    pub split_seed: u64,
    pub eval_fraction: f64,
    pub task: Task,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            width: 6,
            height: 6,
            dyna: false,
            group: false,
            nl: false,
            max_frames: 1000,
            step_penalty: -0.02,
            discount: 0.99,
            split: SplitId::Train,
            split_seed: 0,
            eval_fraction: 0.2,
            task: Task::Rtfm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Base6,
    Base10,
    Full6,
    Full10,
    Rps,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Base6,
        Preset::Base10,
        Preset::Full6,
        Preset::Full10,
        Preset::Rps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Base6 => "base6",
            Preset::Base10 => "base10",
            Preset::Full6 => "full6",
            Preset::Full10 => "full10",
            Preset::Rps => "rps",
        }
    }

    pub fn config(self) -> EpisodeConfig {
        let base = EpisodeConfig::default();
        let full = |size| EpisodeConfig {
            width: size,
            height: size,
            dyna: true,
            group: true,
            nl: true,
            ..EpisodeConfig::default()
        };
        match self {
            Preset::Base6 => base,
            Preset::Base10 => EpisodeConfig {
                width: 10,
                height: 10,
                ..base
            },
            Preset::Full6 => full(6),
            Preset::Full10 => full(10),
            Preset::Rps => EpisodeConfig {
                width: 10,
                height: 10,
                task: Task::Rps(RpsKind::Permutation),
                ..base
            },
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset {s:?}")))
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.width < 4 || self.height < 4 {
            return bad(format!("grid {}x{} smaller than 4x4", self.width, self.height));
        }
        if self.max_frames < 1 {
            return bad("max_frames must be at least 1".into());
        }
        if self.step_penalty.is_nan() || self.step_penalty > 0.0 {
            return bad(format!("step_penalty {} must be <= 0", self.step_penalty));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad(format!("discount {} outside (0, 1]", self.discount));
        }
        if !(0.0..=1.0).contains(&self.eval_fraction) {
            return bad(format!("eval_fraction {} outside [0, 1]", self.eval_fraction));
        }
        let interior = (self.width - 2) * (self.height - 2);
        // Agent, two monsters and two items, or one monster and three items.
        let entities = 5;
        if interior < entities {
            return bad(format!("interior of {interior} cells cannot hold {entities} entities"));
        }
        Ok(())
    }

    /// Monsters per team and modifiers per element.
    pub fn multiplicity(&self) -> usize {
        if self.group {
            2
        } else {
            1
        }
    }
}

fn compatible(a: &AssignmentTuple, b: &AssignmentTuple) -> bool {
    a.team != b.team && a.element != b.element && a.monster != b.monster && a.modifier != b.modifier
}

/// Attempts at drawing a compatible target/distractor tuple pair before
/// falling back to exhaustive enumeration.
const PAIR_ATTEMPTS: usize = 10_000;

fn pick_pair<R: Rng + ?Sized>(rng: &mut R, split: &SplitSpec) -> Result<(AssignmentTuple, AssignmentTuple)> {
    let members: Vec<&AssignmentTuple> = split.members.iter().collect();
    if members.is_empty() {
        return Err(Error::SplitExhausted(split.split_id.to_string()));
    }
    for _ in 0..PAIR_ATTEMPTS {
        let a = members[rng.gen_range(0..members.len())];
        let b = members[rng.gen_range(0..members.len())];
        if compatible(a, b) {
            return Ok((a.clone(), b.clone()));
        }
    }
    let pairs: Vec<(&AssignmentTuple, &AssignmentTuple)> = members
        .iter()
        .flat_map(|&a| members.iter().map(move |&b| (a, b)))
        .filter(|(a, b)| compatible(a, b))
        .collect();
    match pairs.choose(rng) {
        Some((a, b)) => Ok(((*a).clone(), (*b).clone())),
        None => Err(Error::SplitExhausted(split.split_id.to_string())),
    }
}

/// Fills `groups` (in order) with `k` members each; `fixed` pins members
/// to groups before the rest are drawn from the unused pool.
fn fill_groups<R: Rng + ?Sized>(
    rng: &mut R,
    pool: &[String],
    groups: &[String],
    k: usize,
    fixed: &[(&str, &str)],
) -> BTreeMap<String, String> {
    let mut map: BTreeMap<String, String> = fixed.iter().map(|(m, g)| (m.to_string(), g.to_string())).collect();
    let mut free: Vec<&String> = pool.iter().filter(|m| !map.contains_key(*m)).collect();
    free.shuffle(rng);
    for g in groups {
        let have = map.values().filter(|v| *v == g).count();
        for _ in have..k {
            let m = free.pop().expect("pool size checked");
            map.insert(m.clone(), g.clone());
        }
    }
    map
}

/// Samples one episode's hidden rules. All teams and elements are used;
/// each gets `config.multiplicity()` monsters or modifiers. The target and
/// distractor tuples are both members of `split`.
pub fn sample_dynamics<R: Rng + ?Sized>(
    rng: &mut R,
    config: &EpisodeConfig,
    catalog: &EntityCatalog,
    split: &SplitSpec,
) -> Result<DynamicsAssignment> {
    if split.split_id != config.split {
        return Err(Error::InvalidConfig(format!(
            "config wants the {} split but got {}",
            config.split, split.split_id
        )));
    }
    let k = config.multiplicity();
    if catalog.monsters.len() < k * catalog.teams.len() || catalog.modifiers.len() < k * catalog.elements.len() {
        return Err(Error::InvalidCatalog(format!(
            "catalog too small for {k} monsters per team and {k} modifiers per element"
        )));
    }
    if catalog.teams.len() < 2 || catalog.elements.len() < 2 {
        return Err(Error::InvalidCatalog("need at least 2 teams and 2 elements".into()));
    }
    let (target, distractor) = pick_pair(rng, split)?;
    let monster_team = fill_groups(
        rng,
        &catalog.monsters,
        &catalog.teams,
        k,
        &[(&target.monster, &target.team), (&distractor.monster, &distractor.team)],
    );
    let modifier_element = fill_groups(
        rng,
        &catalog.modifiers,
        &catalog.elements,
        k,
        &[
            (&target.modifier, &target.element),
            (&distractor.modifier, &distractor.element),
        ],
    );
    let assignment = DynamicsAssignment {
        monster_team,
        modifier_element,
        target_team: target.team,
        target_monster: target.monster,
        target_element: target.element,
        target_modifier: target.modifier,
        target_weapon: catalog.weapons.choose(rng).expect("non-empty").clone(),
        distractor_monster: distractor.monster,
        distractor_element: distractor.element,
        distractor_modifier: distractor.modifier,
        distractor_weapon: catalog.weapons.choose(rng).expect("non-empty").clone(),
    };
    debug_assert!(assignment.check_invariants(catalog).is_ok());
    Ok(assignment)
}

/// Template counts of a pack, for counting documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackSizes {
    pub goal: usize,
    pub team: usize,
    pub modifier: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceCount {
    /// Distinct monster-to-team and modifier-to-element group assignments.
    pub dynamics: u128,
    /// Distinct document texts: assignments times statement orders times
    /// template choices.
    pub documents: u128,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Ways to give each of `groups` exactly `k` distinct members out of `pool`.
fn group_assignments(pool: usize, groups: usize, k: usize) -> u128 {
    (0..groups).map(|g| binomial(pool.saturating_sub(g * k), k)).product()
}

pub fn count_space(catalog: &EntityCatalog, config: &EpisodeConfig, pack: PackSizes) -> SpaceCount {
    let k = config.multiplicity();
    let (t, e) = (catalog.teams.len(), catalog.elements.len());
    let dynamics = group_assignments(catalog.monsters.len(), t, k) * group_assignments(catalog.modifiers.len(), e, k);
    let orders = factorial(t + e);
    let templates = if config.nl {
        (pack.team as u128).pow(t as u32) * (pack.modifier as u128).pow(e as u32)
    } else {
        1
    };
    SpaceCount {
        dynamics,
        documents: dynamics * orders * templates,
    }
}
