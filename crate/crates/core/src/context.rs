//! Per-state control information of a supervisor relative to its plant.
//!
//! For a supervisor `S` and plant `G` the context records, per supervisor
//! state `x`:
//!
//! * `E(x)`: events `S` enables at `x`,
//! * `D_k(x)`: events of agent `k`'s controllable set that `S` disables at
//!   `x` although the plant enables them after some string leading to `x`,
//! * `M(x)`: whether `x` is marked in `S`,
//! * `T(x)`: whether some string leading to `x` leads to a marked plant state.
//!
//! `D_k` and `T` are existential over all plant states paired with `x` in
//! the reachable part of `S × G`.

use std::collections::{HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::automaton::{Automaton, EventTable, StateId};
use crate::error::{Error, Result};

pub type EventSet = FixedBitSet;

/// Event alphabet and locally controllable events of one agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSpec {
    /// 1-based agent index.
    pub agent_index: usize,
    pub sigma: EventSet,
    pub controllable: EventSet,
}

impl AgentSpec {
    /// Derives the agents `1..=n` from event ownership and controllability.
    pub fn from_table(events: &EventTable) -> Vec<AgentSpec> {
        (1..=events.num_agents())
            .map(|k| {
                let mut sigma = EventSet::with_capacity(events.len());
                let mut controllable = EventSet::with_capacity(events.len());
                for (e, d) in events.decls().iter().enumerate() {
                    if d.agent == k {
                        sigma.insert(e);
                        if d.controllable {
                            controllable.insert(e);
                        }
                    }
                }
                AgentSpec {
                    agent_index: k,
                    sigma,
                    controllable,
                }
            })
            .collect()
    }

    fn validate(&self, events: &EventTable) -> Result<()> {
        if self.sigma.len() != events.len() || self.controllable.len() != events.len() {
            return Err(Error::InvalidConfig(format!(
                "agent {} event sets are sized for a different alphabet",
                self.agent_index
            )));
        }
        if !self.controllable.is_subset(&self.sigma) {
            return Err(Error::InvalidConfig(format!(
                "agent {}: controllable events are not a subset of its events",
                self.agent_index
            )));
        }
        if let Some(e) = self.controllable.ones().find(|&e| !events.is_controllable(e)) {
            return Err(Error::InvalidConfig(format!(
                "agent {}: event `{}` is uncontrollable",
                self.agent_index,
                events.name(e)
            )));
        }
        Ok(())
    }
}

/// Cached `E`, `D_k`, `M`, `T` tables for one (plant, supervisor) pair.
#[derive(Debug, Clone)]
pub struct ControlContext {
    enabled: Vec<EventSet>,
    /// `disabled[slot][x]`, one slot per agent in `agents`.
    disabled: Vec<Vec<EventSet>>,
    marked_sup: Vec<bool>,
    marked_plant_reach: Vec<bool>,
    agents: Vec<AgentSpec>,
    slot_of: HashMap<usize, usize>,
}

impl ControlContext {
    pub fn num_states(&self) -> usize {
        self.enabled.len()
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn enabled(&self, x: StateId) -> &EventSet {
        &self.enabled[x]
    }

    pub fn marked(&self, x: StateId) -> bool {
        self.marked_sup[x]
    }

    pub fn plant_marked_reach(&self, x: StateId) -> bool {
        self.marked_plant_reach[x]
    }

    pub fn disabled(&self, k: usize, x: StateId) -> Result<&EventSet> {
        Ok(&self.agent(k)?.disabled[x])
    }

    /// View of the context restricted to agent `k`.
    pub fn agent(&self, k: usize) -> Result<AgentView<'_>> {
        let slot = *self.slot_of.get(&k).ok_or(Error::UnknownAgent(k))?;
        Ok(AgentView {
            ctx: self,
            agent: k,
            disabled: &self.disabled[slot],
        })
    }
}

/// The context as seen by one agent: `E`, `D_k`, `M`, `T` and the control
/// consistency relation `R_k`.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    ctx: &'a ControlContext,
    agent: usize,
    disabled: &'a [EventSet],
}

impl<'a> AgentView<'a> {
    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn context(&self) -> &'a ControlContext {
        self.ctx
    }

    pub fn enabled(&self, x: StateId) -> &'a EventSet {
        &self.ctx.enabled[x]
    }

    pub fn disabled(&self, x: StateId) -> &'a EventSet {
        &self.disabled[x]
    }

    /// `(x, y) ∈ R_k`: neither state enables what the other disables, and
    /// equal plant-marking implies equal supervisor marking.
    pub fn consistent(&self, x: StateId, y: StateId) -> bool {
        let c = self.ctx;
        c.enabled[x].is_disjoint(&self.disabled[y])
            && c.enabled[y].is_disjoint(&self.disabled[x])
            && (c.marked_plant_reach[x] != c.marked_plant_reach[y]
                || c.marked_sup[x] == c.marked_sup[y])
    }
}

/// Computes the control context of supervisor `s` for plant `g` by forward
/// reachability over the pairs `(x, q)` of `S × G`.
///
/// Assumes `L(S) ⊆ L(G)`; this is not checked. Supervisor states that are
/// never paired with a plant state get `E` from `s`, empty `D_k` and `T = 0`.
pub fn build_context(g: &Automaton, s: &Automaton, agents: &[AgentSpec]) -> Result<ControlContext> {
    if !g.shares_alphabet(s) {
        return Err(Error::AlphabetMismatch);
    }
    let events = s.events();
    let mut slot_of = HashMap::with_capacity(agents.len());
    for (slot, a) in agents.iter().enumerate() {
        a.validate(events)?;
        if slot_of.insert(a.agent_index, slot).is_some() {
            return Err(Error::InvalidConfig(format!(
                "agent {} listed twice",
                a.agent_index
            )));
        }
    }

    let n = s.num_states();
    let ne = events.len();
    let enabled: Vec<EventSet> = (0..n)
        .map(|x| {
            let mut set = EventSet::with_capacity(ne);
            set.extend(s.transitions(x).iter().map(|&(e, _)| e));
            set
        })
        .collect();

    // All controllable events the plant offers but the supervisor refuses.
    let mut refused = vec![EventSet::with_capacity(ne); n];
    let mut marked_plant_reach = vec![false; n];

    let start = (s.initial(), g.initial());
    let mut seen = std::collections::HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((x, q)) = queue.pop_front() {
        if g.is_marked(q) {
            marked_plant_reach[x] = true;
        }
        for &(e, q2) in g.transitions(q) {
            match s.next(x, e) {
                Some(x2) => {
                    if seen.insert((x2, q2)) {
                        queue.push_back((x2, q2));
                    }
                }
                None => {
                    if events.is_controllable(e) {
                        refused[x].insert(e);
                    }
                }
            }
        }
    }

    let disabled = agents
        .iter()
        .map(|a| {
            refused
                .iter()
                .map(|r| {
                    let mut d = r.clone();
                    d.intersect_with(&a.controllable);
                    d
                })
                .collect()
        })
        .collect();

    Ok(ControlContext {
        enabled,
        disabled,
        marked_sup: (0..n).map(|x| s.is_marked(x)).collect(),
        marked_plant_reach,
        agents: agents.to_vec(),
        slot_of,
    })
}
