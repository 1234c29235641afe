//! Goal and document rendering from a [`DynamicsAssignment`], the inverse
//! parser used by the reading agents, and the shared tokenizer/vocabulary.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::worldgen::{DynamicsAssignment, EntityCatalog, PackSizes};

pub const PACK_VERSION: u32 = 1;
pub const GOAL_TEMPLATES: usize = 12;
pub const TEAM_TEMPLATES: usize = 10;
pub const MODIFIER_TEMPLATES: usize = 10;

pub const CANONICAL_GOAL: &str = "Defeat the {team}.";
pub const CANONICAL_TEAM: &str = "{team}: {monsters}.";
pub const CANONICAL_MODIFIER: &str = "{modifiers} beats {element}.";

const NL_SEPARATOR: &str = " and ";
const CANONICAL_SEPARATOR: &str = ", ";

const STANDARD_PACK: &str = include_str!("../assets/templates.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Slot {
    Team,
    Monsters,
    Modifiers,
    Element,
}

impl Slot {
    const ALL: [Slot; 4] = [Slot::Team, Slot::Monsters, Slot::Modifiers, Slot::Element];

    fn marker(self) -> &'static str {
        match self {
            Slot::Team => "{team}",
            Slot::Monsters => "{monsters}",
            Slot::Modifiers => "{modifiers}",
            Slot::Element => "{element}",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Part {
    Lit(String),
    Slot(Slot),
}

fn compile(template: &str) -> Vec<Part> {
    let mut parts = Vec::new();
    let mut rest = template;
    while !rest.is_empty() {
        let next = Slot::ALL
            .iter()
            .filter_map(|&s| rest.find(s.marker()).map(|i| (i, s)))
            .min_by_key(|&(i, _)| i);
        match next {
            Some((i, slot)) => {
                if i > 0 {
                    parts.push(Part::Lit(rest[..i].to_string()));
                }
                parts.push(Part::Slot(slot));
                rest = &rest[i + slot.marker().len()..];
            }
            None => {
                parts.push(Part::Lit(rest.to_string()));
                rest = "";
            }
        }
    }
    parts
}

/// Every way `text` can be read as `parts`, as slot bindings.
fn match_parts(parts: &[Part], text: &str) -> Vec<BTreeMap<Slot, String>> {
    fn go(parts: &[Part], text: &str, bound: &mut BTreeMap<Slot, String>, out: &mut Vec<BTreeMap<Slot, String>>) {
        match parts.split_first() {
            None => {
                if text.is_empty() {
                    out.push(bound.clone());
                }
            }
            Some((Part::Lit(lit), rest)) => {
                if let Some(tail) = text.strip_prefix(lit.as_str()) {
                    go(rest, tail, bound, out);
                }
            }
            Some((Part::Slot(slot), rest)) => {
                let next_lit = match rest.first() {
                    Some(Part::Lit(l)) => l.as_str(),
                    Some(Part::Slot(_)) => return,
                    None => {
                        if !text.is_empty() {
                            bound.insert(*slot, text.to_string());
                            out.push(bound.clone());
                            bound.remove(slot);
                        }
                        return;
                    }
                };
                for (i, _) in text.match_indices(next_lit) {
                    if i == 0 {
                        continue;
                    }
                    bound.insert(*slot, text[..i].to_string());
                    go(rest, &text[i..], bound, out);
                    bound.remove(slot);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(parts, text, &mut BTreeMap::new(), &mut out);
    out
}

fn check_template(template: &str, slots: &[Slot], family: &str) -> Result<()> {
    let bad = |msg: &str| Err(Error::Pack(format!("{family} template {template:?}: {msg}")));
    for slot in Slot::ALL {
        let n = template.matches(slot.marker()).count();
        let want = usize::from(slots.contains(&slot));
        if n != want {
            return bad(&format!("expected {} {} slot(s), found {n}", want, slot.marker()));
        }
    }
    if !template.ends_with('.') || template.matches('.').count() != 1 {
        return bad("must end with the only full stop");
    }
    if compile(template)
        .windows(2)
        .any(|w| matches!(w, [Part::Slot(_), Part::Slot(_)]))
    {
        return bad("adjacent slots");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplatePack {
    pub version: u32,
    pub goal_templates: Vec<String>,
    pub team_templates: Vec<String>,
    pub modifier_templates: Vec<String>,
}

impl TemplatePack {
    /// Checks slot usage only; any non-zero count of templates is allowed.
    pub fn new(
        goal_templates: Vec<String>,
        team_templates: Vec<String>,
        modifier_templates: Vec<String>,
    ) -> Result<Self> {
        let pack = TemplatePack {
            version: PACK_VERSION,
            goal_templates,
            team_templates,
            modifier_templates,
        };
        pack.check_slots()?;
        Ok(pack)
    }

    fn check_slots(&self) -> Result<()> {
        let families: [(&str, &[String], &[Slot]); 3] = [
            ("goal", &self.goal_templates, &[Slot::Team]),
            ("team", &self.team_templates, &[Slot::Team, Slot::Monsters]),
            ("modifier", &self.modifier_templates, &[Slot::Modifiers, Slot::Element]),
        ];
        for (family, templates, slots) in families {
            if templates.is_empty() {
                return Err(Error::Pack(format!("no {family} templates")));
            }
            let distinct: BTreeSet<&String> = templates.iter().collect();
            if distinct.len() != templates.len() {
                return Err(Error::Pack(format!("duplicate {family} template")));
            }
            for t in templates {
                check_template(t, slots, family)?;
            }
        }
        Ok(())
    }

    /// Parses a pack file, requiring the 12/10/10 template counts.
    pub fn from_json(text: &str) -> Result<Self> {
        let pack: TemplatePack = serde_json::from_str(text)?;
        if pack.version != PACK_VERSION {
            return Err(Error::Pack(format!("version {} unsupported", pack.version)));
        }
        let counts = [
            pack.goal_templates.len(),
            pack.team_templates.len(),
            pack.modifier_templates.len(),
        ];
        if counts != [GOAL_TEMPLATES, TEAM_TEMPLATES, MODIFIER_TEMPLATES] {
            return Err(Error::Pack(format!(
                "template counts {counts:?}, expected [12, 10, 10]"
            )));
        }
        pack.check_slots()?;
        Ok(pack)
    }

    /// The pack shipped in `assets/templates.json`.
    pub fn standard() -> Self {
        Self::from_json(STANDARD_PACK).expect("bundled template pack is valid")
    }

    pub fn sizes(&self) -> PackSizes {
        PackSizes {
            goal: self.goal_templates.len(),
            team: self.team_templates.len(),
            modifier: self.modifier_templates.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Statement {
    Team { team: String, monsters: Vec<String> },
    Beats { element: String, modifiers: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedStatement {
    pub statement: Statement,
    /// Index into the pack's team or modifier templates; `None` for the
    /// canonical grammar.
    pub template: Option<usize>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub statements: Vec<RenderedStatement>,
    pub text: String,
    pub statement_order_seed: u64,
}

impl Document {
    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedTexts {
    pub goal: String,
    pub goal_template: Option<usize>,
    pub document: Document,
}

fn join_list(items: &[String], nl: bool) -> String {
    let mut sorted = items.to_vec();
    sorted.sort();
    sorted.join(if nl { NL_SEPARATOR } else { CANONICAL_SEPARATOR })
}

/// Fills `template` with the statement's values.
pub fn fill_statement(statement: &Statement, template: &str, nl: bool) -> String {
    match statement {
        Statement::Team { team, monsters } => template
            .replace("{team}", team)
            .replace("{monsters}", &join_list(monsters, nl)),
        Statement::Beats { element, modifiers } => template
            .replace("{element}", element)
            .replace("{modifiers}", &join_list(modifiers, nl)),
    }
}

/// Text of `statement` under template `template` of `pack`, or the
/// canonical grammar when `template` is `None`.
pub fn render_statement(statement: &Statement, template: Option<usize>, pack: &TemplatePack) -> String {
    let family = match statement {
        Statement::Team { .. } => (&pack.team_templates, CANONICAL_TEAM),
        Statement::Beats { .. } => (&pack.modifier_templates, CANONICAL_MODIFIER),
    };
    match template {
        Some(i) => fill_statement(statement, &family.0[i], true),
        None => fill_statement(statement, family.1, false),
    }
}

pub fn render_goal(team: &str, template: Option<usize>, pack: &TemplatePack) -> String {
    match template {
        Some(i) => pack.goal_templates[i].replace("{team}", team),
        None => CANONICAL_GOAL.replace("{team}", team),
    }
}

/// One statement per team and per element of the assignment, in name order.
pub fn statements_of(assignment: &DynamicsAssignment) -> Vec<Statement> {
    let teams: BTreeSet<&String> = assignment.monster_team.values().collect();
    let elements: BTreeSet<&String> = assignment.modifier_element.values().collect();
    let mut out = Vec::new();
    for team in teams {
        out.push(Statement::Team {
            team: team.clone(),
            monsters: assignment.team_members(team).into_iter().map(String::from).collect(),
        });
    }
    for element in elements {
        out.push(Statement::Beats {
            element: element.clone(),
            modifiers: assignment
                .modifiers_beating(element)
                .into_iter()
                .map(String::from)
                .collect(),
        });
    }
    out
}

/// Draws the goal template, then one template per statement, then the
/// statement order. Canonical mode draws only the order.
pub fn render_texts<R: Rng + ?Sized>(
    assignment: &DynamicsAssignment,
    rng: &mut R,
    nl: bool,
    pack: &TemplatePack,
) -> RenderedTexts {
    let goal_template = nl.then(|| rng.gen_range(0..pack.goal_templates.len()));
    let goal = render_goal(&assignment.target_team, goal_template, pack);
    let mut statements: Vec<RenderedStatement> = statements_of(assignment)
        .into_iter()
        .map(|statement| {
            let template = nl.then(|| {
                let n = match statement {
                    Statement::Team { .. } => pack.team_templates.len(),
                    Statement::Beats { .. } => pack.modifier_templates.len(),
                };
                rng.gen_range(0..n)
            });
            let text = render_statement(&statement, template, pack);
            RenderedStatement {
                statement,
                template,
                text,
            }
        })
        .collect();
    let statement_order_seed = rng.gen::<u64>();
    statements.shuffle(&mut ChaCha8Rng::seed_from_u64(statement_order_seed));
    let text = statements.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
    RenderedTexts {
        goal,
        goal_template,
        document: Document {
            statements,
            text,
            statement_order_seed,
        },
    }
}

/// Splits document text into statements, each keeping its full stop.
pub fn split_statements(text: &str) -> Vec<&str> {
    text.split_inclusive('.')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_list(value: &str, separator: &str, allowed: &[String]) -> Option<Vec<String>> {
    let items: Vec<&str> = value.split(separator).collect();
    let mut seen = BTreeSet::new();
    for item in &items {
        if !allowed.iter().any(|a| a == item) || !seen.insert(*item) {
            return None;
        }
    }
    Some(items.into_iter().map(String::from).collect())
}

fn interpret(bound: &BTreeMap<Slot, String>, separator: &str, catalog: &EntityCatalog) -> Option<Statement> {
    if let (Some(team), Some(monsters)) = (bound.get(&Slot::Team), bound.get(&Slot::Monsters)) {
        if !catalog.teams.contains(team) {
            return None;
        }
        let mut monsters = parse_list(monsters, separator, &catalog.monsters)?;
        monsters.sort();
        return Some(Statement::Team {
            team: team.clone(),
            monsters,
        });
    }
    if let (Some(element), Some(modifiers)) = (bound.get(&Slot::Element), bound.get(&Slot::Modifiers)) {
        if !catalog.elements.contains(element) {
            return None;
        }
        let mut modifiers = parse_list(modifiers, separator, &catalog.modifiers)?;
        modifiers.sort();
        return Some(Statement::Beats {
            element: element.clone(),
            modifiers,
        });
    }
    None
}

/// Reads one statement against every template of the pack and the
/// canonical grammar, keeping readings whose values are catalog entities.
pub fn parse_statement(text: &str, catalog: &EntityCatalog, pack: &TemplatePack) -> Result<Statement> {
    let nl = pack.team_templates.iter().chain(&pack.modifier_templates);
    let candidates = nl.map(|t| (t.as_str(), NL_SEPARATOR)).chain([
        (CANONICAL_TEAM, CANONICAL_SEPARATOR),
        (CANONICAL_MODIFIER, CANONICAL_SEPARATOR),
    ]);
    let mut readings = BTreeSet::new();
    for (template, separator) in candidates {
        for bound in match_parts(&compile(template), text) {
            if let Some(s) = interpret(&bound, separator, catalog) {
                readings.insert(s);
            }
        }
    }
    match readings.len() {
        0 => Err(Error::Unparseable(text.to_string())),
        1 => Ok(readings.into_iter().next().expect("one reading")),
        _ => Err(Error::AmbiguousTemplate(text.to_string())),
    }
}

/// The team named by a goal written with any goal template or the canonical one.
pub fn parse_goal(text: &str, catalog: &EntityCatalog, pack: &TemplatePack) -> Result<String> {
    let mut teams = BTreeSet::new();
    for template in pack.goal_templates.iter().map(String::as_str).chain([CANONICAL_GOAL]) {
        for bound in match_parts(&compile(template), text.trim()) {
            if let Some(team) = bound.get(&Slot::Team).filter(|t| catalog.teams.contains(t)) {
                teams.insert(team.clone());
            }
        }
    }
    match teams.len() {
        0 => Err(Error::Unparseable(text.to_string())),
        1 => Ok(teams.into_iter().next().expect("one team")),
        _ => Err(Error::AmbiguousTemplate(text.to_string())),
    }
}

/// Assignment maps and target team recovered from text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedDynamics {
    pub monster_team: BTreeMap<String, String>,
    pub modifier_element: BTreeMap<String, String>,
    pub target_team: String,
}

impl ParsedDynamics {
    pub fn matches(&self, assignment: &DynamicsAssignment) -> bool {
        self.monster_team == assignment.monster_team
            && self.modifier_element == assignment.modifier_element
            && self.target_team == assignment.target_team
    }
}

/// Inverts [`render_texts`]: every catalog team and element must have
/// exactly one statement.
pub fn extract_assignment(
    doc: &str,
    goal: &str,
    catalog: &EntityCatalog,
    pack: &TemplatePack,
) -> Result<ParsedDynamics> {
    let mut team_seen = BTreeSet::new();
    let mut element_seen = BTreeSet::new();
    let mut monster_team = BTreeMap::new();
    let mut modifier_element = BTreeMap::new();
    for text in split_statements(doc) {
        match parse_statement(text, catalog, pack)? {
            Statement::Team { team, monsters } => {
                if !team_seen.insert(team.clone()) {
                    return Err(Error::ConflictingStatement(format!("team {team}")));
                }
                for m in monsters {
                    if monster_team.insert(m.clone(), team.clone()).is_some() {
                        return Err(Error::ConflictingStatement(format!("monster {m}")));
                    }
                }
            }
            Statement::Beats { element, modifiers } => {
                if !element_seen.insert(element.clone()) {
                    return Err(Error::ConflictingStatement(format!("element {element}")));
                }
                for d in modifiers {
                    if modifier_element.insert(d.clone(), element.clone()).is_some() {
                        return Err(Error::ConflictingStatement(format!("modifier {d}")));
                    }
                }
            }
        }
    }
    if let Some(t) = catalog.teams.iter().find(|t| !team_seen.contains(*t)) {
        return Err(Error::MissingStatement(format!("team {t}")));
    }
    if let Some(e) = catalog.elements.iter().find(|e| !element_seen.contains(*e)) {
        return Err(Error::MissingStatement(format!("element {e}")));
    }
    Ok(ParsedDynamics {
        monster_team,
        modifier_element,
        target_team: parse_goal(goal, catalog, pack)?,
    })
}

/// Lowercases, strips everything but letters, digits and whitespace, and
/// splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .split_whitespace()
        .map(String::from)
        .collect()
}

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    pub words: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut seen = BTreeSet::new();
        let mut list = vec![PAD.to_string(), UNK.to_string()];
        for w in words {
            if w != PAD && w != UNK && seen.insert(w.clone()) {
                list.push(w);
            }
        }
        let index = list.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocab { words: list, index }
    }

    /// Catalog and pack words plus the fixed observation words and the
    /// rock-paper-scissors alphabet.
    pub fn build(catalog: &EntityCatalog, pack: &TemplatePack, extra: &[&str]) -> Self {
        let mut words: BTreeSet<String> = BTreeSet::new();
        for (_, list) in catalog.lists() {
            for name in list {
                words.extend(tokenize(name));
            }
        }
        let templates = pack
            .goal_templates
            .iter()
            .chain(&pack.team_templates)
            .chain(&pack.modifier_templates)
            .map(String::as_str)
            .chain([CANONICAL_GOAL, CANONICAL_TEAM, CANONICAL_MODIFIER]);
        for t in templates {
            let mut plain = t.to_string();
            for slot in Slot::ALL {
                plain = plain.replace(slot.marker(), " ");
            }
            words.extend(tokenize(&plain));
        }
        words.extend(["and"].map(String::from));
        for e in extra {
            words.extend(tokenize(e));
        }
        Self::from_words(words)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(1)
    }

    pub fn encode(&self, text: &str) -> Vec<usize> {
        tokenize(text).iter().map(|w| self.id(w)).collect()
    }

    pub fn restore_index(&mut self) {
        self.index = self.words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    }
}
