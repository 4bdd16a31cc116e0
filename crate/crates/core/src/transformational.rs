//! Transformational localization: reuse the congruences computed for a
//! base system when localizing an edited (variant) system.
//!
//! States are matched across the two systems by name. A base congruence is
//! carried over to the variant (removed states dropped, added states as
//! singletons), states that no longer fit their cell are isolated, and the
//! result seeds [`localize`].

use std::collections::HashMap;

use crate::automaton::{Automaton, StateId};
use crate::context::{build_context, AgentSpec, ControlContext};
use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::localization::{build_local_supervisor, localize, LocalSupervisor};

/// Base and variant state names split into retained, removed and added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateCorrespondence {
    pub retained: Vec<String>,
    pub removed: Vec<String>,
    pub added: Vec<String>,
}

impl StateCorrespondence {
    /// Retained and added names follow variant order, removed names base order.
    pub fn between(base: &Automaton, variant: &Automaton) -> Self {
        let (retained, added) = variant
            .states()
            .iter()
            .cloned()
            .partition(|n| base.state_index(n).is_some());
        let removed = base
            .states()
            .iter()
            .filter(|n| variant.state_index(n).is_none())
            .cloned()
            .collect();
        Self {
            retained,
            removed,
            added,
        }
    }
}

/// Maps a cover of `base` onto the states of `variant`: removed states
/// leave their cells, added states become singletons.
pub fn carry_over_cover(base_cover: &Cover, base: &Automaton, variant: &Automaton) -> Result<Cover> {
    if base_cover.num_states() != base.num_states() {
        return Err(Error::InvalidCover(format!(
            "base cover has {} states, base supervisor has {}",
            base_cover.num_states(),
            base.num_states()
        )));
    }
    let base_cover = base_cover.normalized();
    let mut fresh = base_cover.num_cells();
    let cell_of = variant
        .states()
        .iter()
        .map(|n| match base.state_index(n) {
            Some(x) => base_cover.cell_of(x),
            None => {
                fresh += 1;
                fresh - 1
            }
        })
        .collect();
    Ok(Cover::from_cell_ids(cell_of).normalized())
}

/// Result of [`isolate_detailed`].
#[derive(Debug, Clone)]
pub struct Isolation {
    /// The carried-over cover, before any isolation.
    pub initial_guess: Cover,
    pub cover: Cover,
    /// Variant states moved to singleton cells, in isolation order.
    pub isolated: Vec<StateId>,
}

/// Turns a base congruence into a congruence of the variant system for
/// agent `k` by isolating conflicting states. `ctx` must be the context
/// of the variant supervisor `s_variant`.
pub fn isolate(
    base_cover: &Cover,
    s_base: &Automaton,
    s_variant: &Automaton,
    ctx: &ControlContext,
    k: usize,
) -> Result<Cover> {
    Ok(isolate_detailed(base_cover, s_base, s_variant, ctx, k)?.cover)
}

pub fn isolate_detailed(
    base_cover: &Cover,
    s_base: &Automaton,
    s_variant: &Automaton,
    ctx: &ControlContext,
    k: usize,
) -> Result<Isolation> {
    if ctx.num_states() != s_variant.num_states() {
        return Err(Error::InvalidConfig(format!(
            "context has {} states, variant supervisor has {}",
            ctx.num_states(),
            s_variant.num_states()
        )));
    }
    let view = ctx.agent(k)?;
    let initial_guess = carry_over_cover(base_cover, s_base, s_variant)?;

    let mut cell: Vec<usize> = initial_guess.cell_ids().to_vec();
    let mut members: HashMap<usize, Vec<StateId>> = HashMap::new();
    for (x, &c) in cell.iter().enumerate() {
        members.entry(c).or_default().push(x);
    }
    let mut next_id = initial_guess.num_cells();
    let retained: Vec<StateId> = (0..s_variant.num_states())
        .filter(|&x| s_base.state_index(s_variant.state_name(x)).is_some())
        .collect();

    let conflicts = |x: StateId, cell: &[usize], mates: &[StateId]| {
        mates.iter().any(|&y| {
            y != x
                && (!view.consistent(x, y)
                    || shared_events_split(s_variant, x, y, cell))
        })
    };

    let mut isolated = Vec::new();
    let mut flag = true;
    while flag {
        flag = false;
        for &x in &retained {
            let c = cell[x];
            let mates = &members[&c];
            if mates.len() < 2 || !conflicts(x, &cell, mates) {
                continue;
            }
            flag = true;
            members.get_mut(&c).expect("cell exists").retain(|&y| y != x);
            cell[x] = next_id;
            members.insert(next_id, vec![x]);
            next_id += 1;
            isolated.push(x);
            // Rescan from the lowest index against the updated cells.
            break;
        }
    }

    Ok(Isolation {
        initial_guess,
        cover: Cover::from_cell_ids(cell).normalized(),
        isolated,
    })
}

/// Whether `x` and `y` reach different cells on some event both enable.
fn shared_events_split(s: &Automaton, x: StateId, y: StateId, cell: &[usize]) -> bool {
    let (a, b) = (s.transitions(x), s.transitions(y));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if cell[a[i].1] != cell[b[j].1] {
                    return true;
                }
                i += 1;
                j += 1;
            }
        }
    }
    false
}

/// For each variant agent, the base agent whose congruence seeds it
/// (`0`: none, start from the singleton cover).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentMapping {
    map: Vec<usize>,
}

impl AgentMapping {
    /// `map[k - 1]` is the base agent of variant agent `k`.
    pub fn new(map: Vec<usize>) -> Self {
        Self { map }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (1..=n).collect(),
        }
    }

    pub fn none(n: usize) -> Self {
        Self { map: vec![0; n] }
    }

    pub fn get(&self, variant_agent: usize) -> Option<usize> {
        variant_agent
            .checked_sub(1)
            .and_then(|i| self.map.get(i))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Parses `<variant-agent> <base-agent-or-0>` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: HashMap<usize, usize> = HashMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [v, b] = fields[..] else {
                return Err(perr("expected `<variant-agent> <base-agent-or-0>`".into()));
            };
            let v: usize = v.parse().map_err(|_| perr(format!("invalid agent `{v}`")))?;
            let b: usize = b.parse().map_err(|_| perr(format!("invalid agent `{b}`")))?;
            if v == 0 {
                return Err(perr("variant agents are numbered from 1".into()));
            }
            if entries.insert(v, b).is_some() {
                return Err(perr(format!("variant agent {v} mapped twice")));
            }
        }
        let n = entries.keys().max().copied().unwrap_or(0);
        let map = (1..=n)
            .map(|k| {
                entries
                    .get(&k)
                    .copied()
                    .ok_or_else(|| Error::InvalidMapping(format!("variant agent {k} is not mapped")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { map })
    }

    pub fn to_text(&self) -> String {
        self.map
            .iter()
            .enumerate()
            .map(|(i, b)| format!("{} {b}\n", i + 1))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TslOutput {
    pub supervisors: Vec<LocalSupervisor>,
    /// One congruence per variant agent, reusable as base covers next time.
    pub covers: Vec<Cover>,
}

/// Transformational localization of the variant system `(g_variant, s_variant)`.
///
/// `base_covers[i]` is the congruence of base agent `i + 1` over `s_base`.
pub fn tsl(
    base_covers: &[Cover],
    s_base: &Automaton,
    g_variant: &Automaton,
    s_variant: &Automaton,
    agents: &[AgentSpec],
    mapping: &AgentMapping,
) -> Result<TslOutput> {
    let ctx = build_context(g_variant, s_variant, agents)?;
    tsl_with_context(base_covers, s_base, s_variant, &ctx, mapping)
}

/// [`tsl`] with a precomputed variant context.
pub fn tsl_with_context(
    base_covers: &[Cover],
    s_base: &Automaton,
    s_variant: &Automaton,
    ctx: &ControlContext,
    mapping: &AgentMapping,
) -> Result<TslOutput> {
    let agents: Vec<usize> = ctx.agents().iter().map(|a| a.agent_index).collect();
    for &k in &agents {
        match mapping.get(k) {
            None => {
                return Err(Error::InvalidMapping(format!(
                    "variant agent {k} has no entry"
                )))
            }
            Some(b) if b > base_covers.len() => {
                return Err(Error::InvalidMapping(format!(
                    "variant agent {k} maps to base agent {b}, but only {} base covers exist",
                    base_covers.len()
                )))
            }
            Some(_) => {}
        }
    }

    let mut supervisors = Vec::with_capacity(agents.len());
    let mut covers = Vec::with_capacity(agents.len());
    for &k in &agents {
        let init = match mapping.get(k).expect("checked above") {
            0 => Cover::singleton(s_variant.num_states()),
            b => isolate(&base_covers[b - 1], s_base, s_variant, ctx, k)?,
        };
        let cover = localize(s_variant, ctx, k, &init)?;
        supervisors.push(build_local_supervisor(s_variant, &cover, k)?);
        covers.push(cover);
    }
    Ok(TslOutput {
        supervisors,
        covers,
    })
}
