//! Generator for the cat-and-mouse tower and its five model edits.
//!
//! Each level has five rooms connected by one-way doors (see
//! `data/cmt_doors.txt`). Consecutive levels are connected in both
//! directions through room `((level - 1) mod 5) + 1`, giving a spiral
//! staircase. Cats start in room 1 of level 1, mice in room 5 of the top
//! level, and a cat and a mouse may never share a room.
//!
//! Every directed door traversal is one event, owned by the agent of the
//! level the animal leaves.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::automaton::{sync_product, Automaton, EventDecl, EventId, EventTable};
use crate::context::AgentSpec;
use crate::error::{Error, Result};
use crate::synthesis::{plant_state_names, synthesize_monolithic};

const DOOR_TABLE: &str = include_str!("../data/cmt_doors.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Base,
    /// Cat door from room 3 to room 4 on level 2 removed.
    V1,
    /// Every door controllable.
    V2,
    /// Cats must never enter level 4.
    V3,
    /// Room 5 of level 1 removed.
    V4,
    /// Room 6 added to level 1, connected both ways to room 5 for cats and mice.
    V5,
}

impl Variant {
    pub const ALL_EDITS: [Variant; 5] = [Variant::V1, Variant::V2, Variant::V3, Variant::V4, Variant::V5];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Base => "base",
            Variant::V1 => "v1",
            Variant::V2 => "v2",
            Variant::V3 => "v3",
            Variant::V4 => "v4",
            Variant::V5 => "v5",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "base" => Variant::Base,
            "v1" => Variant::V1,
            "v2" => Variant::V2,
            "v3" => Variant::V3,
            "v4" => Variant::V4,
            "v5" => Variant::V5,
            other => return Err(Error::InvalidConfig(format!("unknown variant `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CmtConfig {
    pub levels: usize,
    /// Number of cats, and of mice.
    pub animals: usize,
    pub variant: Variant,
}

impl CmtConfig {
    pub fn new(levels: usize, animals: usize, variant: Variant) -> Self {
        Self {
            levels,
            animals,
            variant,
        }
    }

    /// Four levels, one cat, one mouse.
    pub fn standard(variant: Variant) -> Self {
        Self::new(4, 1, variant)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.levels == 0 || self.animals == 0 {
            return bad("levels and animals must be at least 1".into());
        }
        match self.variant {
            Variant::V1 if self.levels < 2 => bad("variant v1 edits level 2".into()),
            Variant::V3 if self.levels < 4 => bad("variant v3 needs a level 4".into()),
            Variant::V4 if self.levels == 1 => {
                bad("variant v4 removes the mice's start room when there is one level".into())
            }
            _ => Ok(()),
        }
    }

    pub fn rooms(&self) -> Vec<RoomId> {
        let mut rooms: Vec<RoomId> = (1..=self.levels)
            .flat_map(|level| (1..=5).map(move |room| RoomId { level, room }))
            .collect();
        match self.variant {
            Variant::V4 => rooms.retain(|r| *r != RoomId::new(1, 5)),
            Variant::V5 => rooms.insert(5, RoomId::new(1, 6)),
            _ => {}
        }
        rooms
    }

    pub fn cat_start(&self) -> RoomId {
        RoomId::new(1, 1)
    }

    pub fn mouse_start(&self) -> RoomId {
        RoomId::new(self.levels, 5)
    }

    pub fn animal_names(&self) -> Vec<(AnimalKind, String)> {
        let mut out = Vec::with_capacity(2 * self.animals);
        for i in 1..=self.animals {
            out.push((AnimalKind::Cat, format!("c{i}")));
        }
        for i in 1..=self.animals {
            out.push((AnimalKind::Mouse, format!("m{i}")));
        }
        out
    }

    /// Name of the initial supervisor state.
    pub fn initial_state_name(&self) -> String {
        self.animal_names()
            .iter()
            .map(|(kind, name)| {
                let room = match kind {
                    AnimalKind::Cat => self.cat_start(),
                    AnimalKind::Mouse => self.mouse_start(),
                };
                plant_state_name(name, room)
            })
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoomId {
    pub level: usize,
    pub room: usize,
}

impl RoomId {
    pub fn new(level: usize, room: usize) -> Self {
        Self { level, room }
    }
}

impl fmt::Display for RoomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}R{}", self.level, self.room)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnimalKind {
    Cat,
    Mouse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Door {
    pub kind: AnimalKind,
    pub from: RoomId,
    pub to: RoomId,
    pub controllable: bool,
}

fn level_doors() -> Result<Vec<(AnimalKind, usize, usize, bool)>> {
    let mut out = Vec::new();
    for (no, raw) in DOOR_TABLE.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let perr = || Error::Parse {
            line: no + 1,
            message: format!("bad door entry `{content}`"),
        };
        let f: Vec<&str> = content.split_whitespace().collect();
        let [animal, from, to, c] = f[..] else {
            return Err(perr());
        };
        let kind = match animal {
            "cat" => AnimalKind::Cat,
            "mouse" => AnimalKind::Mouse,
            _ => return Err(perr()),
        };
        let from = from.parse().map_err(|_| perr())?;
        let to = to.parse().map_err(|_| perr())?;
        let controllable = match c {
            "c" => true,
            "u" => false,
            _ => return Err(perr()),
        };
        out.push((kind, from, to, controllable));
    }
    Ok(out)
}

/// All doors of the configured tower, in generation order: per level the
/// intra-level doors (table order), then the staircases between levels.
pub fn doors(cfg: &CmtConfig) -> Result<Vec<Door>> {
    cfg.validate()?;
    let table = level_doors()?;
    let mut out = Vec::new();
    for level in 1..=cfg.levels {
        for &(kind, from, to, controllable) in &table {
            if cfg.variant == Variant::V1
                && level == 2
                && kind == AnimalKind::Cat
                && (from, to) == (3, 4)
            {
                continue;
            }
            out.push(Door {
                kind,
                from: RoomId::new(level, from),
                to: RoomId::new(level, to),
                controllable,
            });
        }
    }
    if cfg.variant == Variant::V5 {
        for kind in [AnimalKind::Cat, AnimalKind::Mouse] {
            for (from, to) in [(5, 6), (6, 5)] {
                out.push(Door {
                    kind,
                    from: RoomId::new(1, from),
                    to: RoomId::new(1, to),
                    controllable: true,
                });
            }
        }
    }
    for level in 1..cfg.levels {
        let room = (level - 1) % 5 + 1;
        let (lo, hi) = (RoomId::new(level, room), RoomId::new(level + 1, room));
        for kind in [AnimalKind::Cat, AnimalKind::Mouse] {
            for (from, to) in [(lo, hi), (hi, lo)] {
                out.push(Door {
                    kind,
                    from,
                    to,
                    controllable: true,
                });
            }
        }
    }
    if cfg.variant == Variant::V4 {
        let gone = RoomId::new(1, 5);
        out.retain(|d| d.from != gone && d.to != gone);
    }
    if cfg.variant == Variant::V2 {
        for d in &mut out {
            d.controllable = true;
        }
    }
    Ok(out)
}

fn event_name(animal: &str, d: &Door) -> String {
    format!(
        "{animal}_{}_{}__{}_{}",
        d.from.level, d.from.room, d.to.level, d.to.room
    )
}

fn plant_state_name(animal: &str, room: RoomId) -> String {
    format!("{animal}@{room}")
}

/// Generated plant, requirements and agents of one tower configuration.
#[derive(Debug, Clone)]
pub struct CmtModel {
    pub config: CmtConfig,
    pub events: Arc<EventTable>,
    /// One position automaton per animal: cats first, then mice.
    pub plants: Vec<Automaton>,
    pub requirements: Vec<Automaton>,
    pub agents: Vec<AgentSpec>,
}

/// One event per (animal, door).
struct AnimalEvent {
    animal: usize,
    door: Door,
}

pub fn gen_cmt(cfg: &CmtConfig) -> Result<CmtModel> {
    let doors = doors(cfg)?;
    let animals = cfg.animal_names();
    let mut decls = Vec::new();
    let mut meta = Vec::new();
    for (a, (kind, name)) in animals.iter().enumerate() {
        for d in doors.iter().filter(|d| d.kind == *kind) {
            decls.push(EventDecl::new(event_name(name, d), d.controllable, d.from.level));
            meta.push(AnimalEvent { animal: a, door: *d });
        }
    }
    let events = Arc::new(EventTable::new(decls)?);
    let rooms = cfg.rooms();

    let mut plants = Vec::with_capacity(animals.len());
    for (a, (kind, name)) in animals.iter().enumerate() {
        let mut b = Automaton::builder(events.clone());
        for &r in &rooms {
            b.add_state(plant_state_name(name, r))?;
        }
        let start = match kind {
            AnimalKind::Cat => cfg.cat_start(),
            AnimalKind::Mouse => cfg.mouse_start(),
        };
        let start = rooms.iter().position(|&r| r == start).expect("start room exists");
        b.set_initial(start)?;
        b.set_marked(start, true)?;
        let idx = |r: RoomId| rooms.iter().position(|&x| x == r).expect("door rooms exist");
        for (e, m) in meta.iter().enumerate() {
            if m.animal == a {
                b.add_transition(idx(m.door.from), e, idx(m.door.to))?;
            } else {
                for x in 0..rooms.len() {
                    b.add_transition(x, e, x)?;
                }
            }
        }
        plants.push(b.build()?);
    }

    let mut requirements = Vec::new();
    for &room in &rooms {
        requirements.push(room_requirement(cfg, &events, &meta, room)?);
    }
    if cfg.variant == Variant::V3 {
        requirements.push(no_cats_on_level(&events, &meta, 4)?);
    }

    let agents = AgentSpec::from_table(&events);
    Ok(CmtModel {
        config: *cfg,
        events,
        plants,
        requirements,
        agents,
    })
}

/// Occupancy of one room: up to `k` cats or up to `k` mice, never both.
fn room_requirement(
    cfg: &CmtConfig,
    events: &Arc<EventTable>,
    meta: &[AnimalEvent],
    room: RoomId,
) -> Result<Automaton> {
    let k = cfg.animals;
    let mut b = Automaton::builder(events.clone());
    let empty = b.add_state("e")?;
    let cats: Vec<usize> = (1..=k)
        .map(|i| b.add_state(format!("c{i}")))
        .collect::<Result<_>>()?;
    let mice: Vec<usize> = (1..=k)
        .map(|i| b.add_state(format!("m{i}")))
        .collect::<Result<_>>()?;
    // count -> state, for cats and mice
    let cat_state = |n: usize| if n == 0 { empty } else { cats[n - 1] };
    let mouse_state = |n: usize| if n == 0 { empty } else { mice[n - 1] };

    let initial = if room == cfg.cat_start() {
        cat_state(k)
    } else if room == cfg.mouse_start() {
        mouse_state(k)
    } else {
        empty
    };
    b.set_initial(initial)?;
    for x in 0..b.num_states() {
        b.set_marked(x, true)?;
    }

    for (e, m) in meta.iter().enumerate() {
        let d = m.door;
        let count_state = match d.kind {
            AnimalKind::Cat => &cat_state as &dyn Fn(usize) -> usize,
            AnimalKind::Mouse => &mouse_state,
        };
        if d.to == room && d.from != room {
            for n in 0..k {
                b.add_transition(count_state(n), e, count_state(n + 1))?;
            }
        } else if d.from == room && d.to != room {
            for n in 1..=k {
                b.add_transition(count_state(n), e, count_state(n - 1))?;
            }
        } else {
            for x in 0..b.num_states() {
                b.add_transition(x, e, x)?;
            }
        }
    }
    b.build()
}

/// Single-state monitor that prohibits every cat move onto `level`.
fn no_cats_on_level(events: &Arc<EventTable>, meta: &[AnimalEvent], level: usize) -> Result<Automaton> {
    let mut b = Automaton::builder(events.clone());
    let x = b.add_state("ok")?;
    b.set_initial(x)?;
    b.set_marked(x, true)?;
    for (e, m) in meta.iter().enumerate() {
        let d = m.door;
        let enters = d.kind == AnimalKind::Cat && d.to.level == level && d.from.level != level;
        if !enters {
            b.add_transition(x, e as EventId, x)?;
        }
    }
    b.build()
}

impl CmtModel {
    /// Synchronous product of the animal automata.
    pub fn plant(&self) -> Result<Automaton> {
        let refs: Vec<&Automaton> = self.plants.iter().collect();
        sync_product(&refs)
    }

    /// Monolithic supervisor with states named by animal positions only.
    pub fn supervisor(&self) -> Result<Automaton> {
        plant_state_names(&synthesize_monolithic(&self.plants, &self.requirements)?)
    }
}
