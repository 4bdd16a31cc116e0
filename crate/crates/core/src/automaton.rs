//! Deterministic finite automata over a shared, agent-partitioned alphabet.
//!
//! States are addressed by their position in [`Automaton::states`]; names
//! carry identity across model versions. Transitions are kept per state as
//! a list of `(event, target)` pairs sorted by event index.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};

pub type StateId = usize;
pub type EventId = usize;

/// Declaration of one event of an [`EventTable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDecl {
    pub name: String,
    pub controllable: bool,
    /// Owning agent, 1-based.
    pub agent: usize,
}

impl EventDecl {
    pub fn new(name: impl Into<String>, controllable: bool, agent: usize) -> Self {
        Self {
            name: name.into(),
            controllable,
            agent,
        }
    }
}

/// The alphabet: event names, controllability and owning agent per event.
///
/// Every event is local to exactly one agent, so the per-agent event sets
/// partition the alphabet.
#[derive(Debug, Clone)]
pub struct EventTable {
    decls: Vec<EventDecl>,
    index: HashMap<String, EventId>,
}

impl PartialEq for EventTable {
    fn eq(&self, other: &Self) -> bool {
        self.decls == other.decls
    }
}

impl Eq for EventTable {}

impl EventTable {
    pub fn new(decls: Vec<EventDecl>) -> Result<Self> {
        let mut index = HashMap::with_capacity(decls.len());
        for (i, d) in decls.iter().enumerate() {
            if d.name.is_empty() || d.name.chars().any(char::is_whitespace) {
                return Err(Error::EventTable(format!("invalid event name {:?}", d.name)));
            }
            if d.agent == 0 {
                return Err(Error::EventTable(format!(
                    "event `{}` has agent 0; agents are numbered from 1",
                    d.name
                )));
            }
            if index.insert(d.name.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    kind: "event",
                    name: d.name.clone(),
                });
            }
        }
        Ok(Self { decls, index })
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn decls(&self) -> &[EventDecl] {
        &self.decls
    }

    pub fn name(&self, e: EventId) -> &str {
        &self.decls[e].name
    }

    pub fn is_controllable(&self, e: EventId) -> bool {
        self.decls[e].controllable
    }

    pub fn agent_of(&self, e: EventId) -> usize {
        self.decls[e].agent
    }

    pub fn lookup(&self, name: &str) -> Option<EventId> {
        self.index.get(name).copied()
    }

    /// Highest agent index that owns an event (0 for an empty alphabet).
    pub fn num_agents(&self) -> usize {
        self.decls.iter().map(|d| d.agent).max().unwrap_or(0)
    }
}

/// A deterministic finite automaton `(Q, Σ, δ, q0, Qm)`.
#[derive(Debug, Clone)]
pub struct Automaton {
    states: Vec<String>,
    index: HashMap<String, StateId>,
    events: Arc<EventTable>,
    trans: Vec<Vec<(EventId, StateId)>>,
    initial: StateId,
    marked: Vec<bool>,
}

impl PartialEq for Automaton {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.initial == other.initial
            && self.marked == other.marked
            && self.trans == other.trans
            && same_table(&self.events, &other.events)
    }
}

fn same_table(a: &Arc<EventTable>, b: &Arc<EventTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Automaton {
    pub fn builder(events: Arc<EventTable>) -> AutomatonBuilder {
        AutomatonBuilder {
            states: Vec::new(),
            index: HashMap::new(),
            events,
            trans: Vec::new(),
            initial: None,
            marked: Vec::new(),
        }
    }

    pub fn events(&self) -> &Arc<EventTable> {
        &self.events
    }

    pub fn shares_alphabet(&self, other: &Automaton) -> bool {
        same_table(&self.events, &other.events)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, x: StateId) -> &str {
        &self.states[x]
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_marked(&self, x: StateId) -> bool {
        self.marked[x]
    }

    pub fn marked_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.marked
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    /// Outgoing transitions of `x`, sorted by event index.
    pub fn transitions(&self, x: StateId) -> &[(EventId, StateId)] {
        &self.trans[x]
    }

    pub fn next(&self, x: StateId, e: EventId) -> Option<StateId> {
        let out = &self.trans[x];
        out.binary_search_by_key(&e, |&(ev, _)| ev)
            .ok()
            .map(|i| out[i].1)
    }

    pub fn enables(&self, x: StateId, e: EventId) -> bool {
        self.next(x, e).is_some()
    }

    /// Follows `trace` from the initial state.
    pub fn run(&self, trace: &[EventId]) -> Option<StateId> {
        trace
            .iter()
            .try_fold(self.initial, |x, &e| self.next(x, e))
    }

    /// Returns a copy with every state renamed by `f`. Names must stay unique.
    pub fn renamed<F>(&self, mut f: F) -> Result<Automaton>
    where
        F: FnMut(StateId, &str) -> String,
    {
        let states: Vec<String> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, n)| f(i, n))
            .collect();
        let mut index = HashMap::with_capacity(states.len());
        for (i, n) in states.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    kind: "state",
                    name: n.clone(),
                });
            }
        }
        Ok(Automaton {
            states,
            index,
            events: self.events.clone(),
            trans: self.trans.clone(),
            initial: self.initial,
            marked: self.marked.clone(),
        })
    }

    /// Returns a copy that uses `events` as its alphabet handle. The tables must be equal.
    pub fn with_table(mut self, events: &Arc<EventTable>) -> Result<Automaton> {
        if !same_table(&self.events, events) {
            return Err(Error::AlphabetMismatch);
        }
        self.events = events.clone();
        Ok(self)
    }
}

#[derive(Debug)]
pub struct AutomatonBuilder {
    states: Vec<String>,
    index: HashMap<String, StateId>,
    events: Arc<EventTable>,
    trans: Vec<Vec<(EventId, StateId)>>,
    initial: Option<StateId>,
    marked: Vec<bool>,
}

impl AutomatonBuilder {
    pub fn events(&self) -> &Arc<EventTable> {
        &self.events
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> Result<StateId> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Parse {
                line: 0,
                message: format!("invalid state name {name:?}"),
            });
        }
        if self.index.contains_key(&name) {
            return Err(Error::Duplicate { kind: "state", name });
        }
        let id = self.states.len();
        self.index.insert(name.clone(), id);
        self.states.push(name);
        self.trans.push(Vec::new());
        self.marked.push(false);
        Ok(id)
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn set_initial(&mut self, x: StateId) -> Result<()> {
        self.check_state(x)?;
        self.initial = Some(x);
        Ok(())
    }

    pub fn set_marked(&mut self, x: StateId, marked: bool) -> Result<()> {
        self.check_state(x)?;
        self.marked[x] = marked;
        Ok(())
    }

    pub fn add_transition(&mut self, src: StateId, e: EventId, dst: StateId) -> Result<()> {
        self.check_state(src)?;
        self.check_state(dst)?;
        if e >= self.events.len() {
            return Err(Error::OutOfRange {
                kind: "event",
                index: e,
                size: self.events.len(),
            });
        }
        let out = &mut self.trans[src];
        match out.binary_search_by_key(&e, |&(ev, _)| ev) {
            Ok(_) => Err(Error::Nondeterministic {
                state: self.states[src].clone(),
                event: self.events.name(e).to_owned(),
            }),
            Err(pos) => {
                out.insert(pos, (e, dst));
                Ok(())
            }
        }
    }

    fn check_state(&self, x: StateId) -> Result<()> {
        if x < self.states.len() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                kind: "state",
                index: x,
                size: self.states.len(),
            })
        }
    }

    pub fn build(self) -> Result<Automaton> {
        let initial = self.initial.ok_or_else(|| Error::Parse {
            line: 0,
            message: "automaton has no initial state".into(),
        })?;
        Ok(Automaton {
            states: self.states,
            index: self.index,
            events: self.events,
            trans: self.trans,
            initial,
            marked: self.marked,
        })
    }
}

/// A renumbering of states: position `i` of the reordered automaton holds
/// the state that had index `order[i]` before.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateOrder {
    order: Vec<StateId>,
}

impl StateOrder {
    pub fn new(order: Vec<StateId>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &x in &order {
            if x >= order.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::StateOrder(format!(
                    "{order:?} is not a permutation of 0..{}",
                    order.len()
                )));
            }
        }
        Ok(Self { order })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn as_slice(&self) -> &[StateId] {
        &self.order
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.order.len()];
        for (new, &old) in self.order.iter().enumerate() {
            inv[old] = new;
        }
        Self { order: inv }
    }
}

/// Reorders the states of `a` according to `order`.
pub fn apply_state_order(a: &Automaton, order: &StateOrder) -> Result<Automaton> {
    if order.len() != a.num_states() {
        return Err(Error::StateOrder(format!(
            "order has length {}, automaton has {} states",
            order.len(),
            a.num_states()
        )));
    }
    let new_of_old = order.inverse();
    let new_of = |x: StateId| new_of_old.order[x];
    let states: Vec<String> = order.order.iter().map(|&o| a.states[o].clone()).collect();
    let index = states
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    let trans = order
        .order
        .iter()
        .map(|&o| a.trans[o].iter().map(|&(e, t)| (e, new_of(t))).collect())
        .collect();
    let marked = order.order.iter().map(|&o| a.marked[o]).collect();
    Ok(Automaton {
        states,
        index,
        events: a.events.clone(),
        trans,
        initial: new_of(a.initial),
        marked,
    })
}

/// Restricts `a` to the states reachable from its initial state, keeping
/// the relative order of the survivors.
pub fn reachable_trim(a: &Automaton) -> Automaton {
    let mut reach = vec![false; a.num_states()];
    reach[a.initial] = true;
    let mut queue = VecDeque::from([a.initial]);
    while let Some(x) = queue.pop_front() {
        for &(_, t) in &a.trans[x] {
            if !reach[t] {
                reach[t] = true;
                queue.push_back(t);
            }
        }
    }
    restrict(a, &reach)
}

/// Keeps exactly the states flagged in `keep` (which must include the
/// initial state), dropping transitions that leave the kept set.
pub(crate) fn restrict(a: &Automaton, keep: &[bool]) -> Automaton {
    let mut new_id = vec![usize::MAX; a.num_states()];
    let mut states = Vec::new();
    for (x, _) in keep.iter().enumerate().filter(|(_, &k)| k) {
        new_id[x] = states.len();
        states.push(a.states[x].clone());
    }
    let index = states
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    let trans = (0..a.num_states())
        .filter(|&x| keep[x])
        .map(|x| {
            a.trans[x]
                .iter()
                .filter(|&&(_, t)| keep[t])
                .map(|&(e, t)| (e, new_id[t]))
                .collect()
        })
        .collect();
    let marked = (0..a.num_states())
        .filter(|&x| keep[x])
        .map(|x| a.marked[x])
        .collect();
    Automaton {
        states,
        index,
        events: a.events.clone(),
        trans,
        initial: new_id[a.initial],
        marked,
    }
}

/// Reachable synchronous product over a shared alphabet.
///
/// An event is enabled in a tuple iff every component enables it; a tuple
/// is marked iff every component state is marked. Product states are named
/// by joining component names with `.`.
pub fn sync_product(components: &[&Automaton]) -> Result<Automaton> {
    let first = *components
        .first()
        .ok_or_else(|| Error::InvalidConfig("product of zero automata".into()))?;
    if components.iter().any(|c| !c.shares_alphabet(first)) {
        return Err(Error::AlphabetMismatch);
    }
    let events = first.events.clone();
    let init: Vec<StateId> = components.iter().map(|c| c.initial).collect();
    let mut ids: HashMap<Vec<StateId>, StateId> = HashMap::from([(init.clone(), 0)]);
    let mut tuples = vec![init];
    let mut trans: Vec<Vec<(EventId, StateId)>> = Vec::new();
    let mut cursor = 0;
    while cursor < tuples.len() {
        let tuple = tuples[cursor].clone();
        let mut out = Vec::new();
        'events: for &(e, t0) in &first.trans[tuple[0]] {
            let mut target = Vec::with_capacity(tuple.len());
            target.push(t0);
            for (c, &x) in components.iter().zip(&tuple).skip(1) {
                match c.next(x, e) {
                    Some(t) => target.push(t),
                    None => continue 'events,
                }
            }
            let next_id = tuples.len();
            let id = *ids.entry(target.clone()).or_insert_with(|| {
                tuples.push(target);
                next_id
            });
            out.push((e, id));
        }
        trans.push(out);
        cursor += 1;
    }
    let states: Vec<String> = tuples
        .iter()
        .map(|t| {
            components
                .iter()
                .zip(t)
                .map(|(c, &x)| c.states[x].as_str())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();
    let mut index = HashMap::with_capacity(states.len());
    for (i, n) in states.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(Error::Duplicate {
                kind: "state",
                name: n.clone(),
            });
        }
    }
    let marked = tuples
        .iter()
        .map(|t| components.iter().zip(t).all(|(c, &x)| c.marked[x]))
        .collect();
    Ok(Automaton {
        states,
        index,
        events,
        trans,
        initial: 0,
        marked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(names: &[&str]) -> Arc<EventTable> {
        Arc::new(
            EventTable::new(names.iter().map(|n| EventDecl::new(*n, true, 1)).collect()).unwrap(),
        )
    }

    fn chain(ev: &Arc<EventTable>, spec: &[(&str, &str, &str)], states: &[&str]) -> Automaton {
        let mut b = Automaton::builder(ev.clone());
        for s in states {
            b.add_state(*s).unwrap();
        }
        for (s, e, t) in spec {
            let (s, t) = (b.state_index(s).unwrap(), b.state_index(t).unwrap());
            b.add_transition(s, ev.lookup(e).unwrap(), t).unwrap();
        }
        b.set_initial(0).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn event_table_rejects_duplicates_and_agent_zero() {
        let dup = EventTable::new(vec![EventDecl::new("a", true, 1), EventDecl::new("a", false, 2)]);
        assert!(matches!(dup, Err(Error::Duplicate { .. })));
        let zero = EventTable::new(vec![EventDecl::new("a", true, 0)]);
        assert!(matches!(zero, Err(Error::EventTable(_))));
    }

    #[test]
    fn builder_rejects_nondeterminism() {
        let ev = table(&["a"]);
        let mut b = Automaton::builder(ev);
        let x = b.add_state("x").unwrap();
        let y = b.add_state("y").unwrap();
        b.add_transition(x, 0, y).unwrap();
        assert!(matches!(
            b.add_transition(x, 0, x),
            Err(Error::Nondeterministic { .. })
        ));
    }

    #[test]
    fn product_with_neutral_element_is_isomorphic() {
        let ev = table(&["a", "b"]);
        let a = chain(&ev, &[("p", "a", "q"), ("q", "b", "p")], &["p", "q"]);
        let one = chain(&ev, &[("u", "a", "u"), ("u", "b", "u")], &["u"]);
        let p = sync_product(&[&a, &one]).unwrap();
        assert_eq!(p.num_states(), 2);
        assert_eq!(p.num_transitions(), 2);
        assert_eq!(p.state_name(0), "p.u");
        assert_eq!(p.next(0, 0), Some(1));
    }

    #[test]
    fn product_disjoint_enablement_never_fires() {
        // A enables a only in its second state, B only in its first;
        // both need b to move, so the tuples are (p0,q0) -b-> (p1,q1).
        let ev = table(&["a", "b"]);
        let a = chain(&ev, &[("p0", "b", "p1"), ("p1", "a", "p1")], &["p0", "p1"]);
        let b = chain(&ev, &[("q0", "a", "q0"), ("q0", "b", "q1")], &["q0", "q1"]);
        let p = sync_product(&[&a, &b]).unwrap();
        assert_eq!(p.num_states(), 2);
        for x in 0..p.num_states() {
            assert!(!p.enables(x, 0));
        }
    }

    #[test]
    fn product_rejects_foreign_alphabet() {
        let a = chain(&table(&["a"]), &[], &["p"]);
        let b = chain(&table(&["b"]), &[], &["q"]);
        assert!(matches!(sync_product(&[&a, &b]), Err(Error::AlphabetMismatch)));
    }

    #[test]
    fn trim_drops_unreachable() {
        let ev = table(&["a"]);
        let a = chain(&ev, &[("p", "a", "q"), ("r", "a", "p")], &["p", "q", "r"]);
        let t = reachable_trim(&a);
        assert_eq!(t.states(), &["p".to_string(), "q".to_string()]);
        assert_eq!(t.num_transitions(), 1);
        let again = reachable_trim(&t);
        assert_eq!(again, t);
    }

    #[test]
    fn order_roundtrip() {
        let ev = table(&["a", "b"]);
        let a = chain(
            &ev,
            &[("p", "a", "q"), ("q", "b", "r"), ("r", "a", "p")],
            &["p", "q", "r"],
        );
        let o = StateOrder::new(vec![2, 0, 1]).unwrap();
        let b = apply_state_order(&a, &o).unwrap();
        assert_eq!(b.state_name(0), "r");
        assert_eq!(b.initial(), 1);
        assert_eq!(apply_state_order(&b, &o.inverse()).unwrap(), a);
        assert_eq!(apply_state_order(&a, &StateOrder::identity(3)).unwrap(), a);
        assert!(StateOrder::new(vec![0, 0, 1]).is_err());
        assert!(apply_state_order(&a, &StateOrder::identity(2)).is_err());
    }
}
