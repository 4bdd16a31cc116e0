//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsl_core::automaton::{reachable_trim, Automaton, EventDecl, EventId, EventTable, StateId};
use tsl_core::context::AgentSpec;
use tsl_core::cover::Cover;
use tsl_core::format::{parse_automaton, parse_automaton_with};
use tsl_core::synthesis::synthesize_monolithic;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Plant, base supervisor and variant supervisor of the five-state example.
pub struct Example {
    pub g: Automaton,
    pub s: Automaton,
    pub s_variant: Automaton,
    pub agents: Vec<AgentSpec>,
}

pub fn example() -> Example {
    let g = parse_automaton(&read_data("example1_plant.aut")).unwrap();
    let s = parse_automaton_with(&read_data("example1.aut"), g.events()).unwrap();
    let s_variant = parse_automaton_with(&read_data("example1_variant.aut"), g.events()).unwrap();
    let agents = AgentSpec::from_table(g.events());
    Example {
        g,
        s,
        s_variant,
        agents,
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub g: Automaton,
    pub s: Automaton,
    pub agents: Vec<AgentSpec>,
}

/// Transition list of an automaton by names, for rebuilding.
#[derive(Debug, Clone)]
struct Spec {
    states: Vec<String>,
    initial: usize,
    marked: Vec<bool>,
    trans: Vec<(usize, EventId, usize)>,
}

impl Spec {
    fn of(a: &Automaton) -> Self {
        let mut trans = Vec::new();
        for x in 0..a.num_states() {
            for &(e, t) in a.transitions(x) {
                trans.push((x, e, t));
            }
        }
        Spec {
            states: a.states().to_vec(),
            initial: a.initial(),
            marked: (0..a.num_states()).map(|x| a.is_marked(x)).collect(),
            trans,
        }
    }

    fn build(&self, table: &Arc<EventTable>) -> Automaton {
        let mut b = Automaton::builder(table.clone());
        for name in &self.states {
            b.add_state(name.clone()).unwrap();
        }
        b.set_initial(self.initial).unwrap();
        for (x, &m) in self.marked.iter().enumerate() {
            b.set_marked(x, m).unwrap();
        }
        for &(x, e, t) in &self.trans {
            b.add_transition(x, e, t).unwrap();
        }
        reachable_trim(&b.build().unwrap())
    }
}

fn random_table(rng: &mut ChaCha8Rng) -> Arc<EventTable> {
    let n_events = rng.random_range(2..=5);
    let n_agents = rng.random_range(1..=2);
    let decls = (0..n_events)
        .map(|i| {
            EventDecl::new(
                format!("e{i}"),
                rng.random_bool(0.7),
                rng.random_range(1..=n_agents),
            )
        })
        .collect();
    Arc::new(EventTable::new(decls).unwrap())
}

fn random_automaton(rng: &mut ChaCha8Rng, table: &Arc<EventTable>, prefix: &str, n: usize, density: f64) -> Automaton {
    let mut spec = Spec {
        states: (0..n).map(|i| format!("{prefix}{i}")).collect(),
        initial: 0,
        marked: (0..n).map(|_| rng.random_bool(0.4)).collect(),
        trans: Vec::new(),
    };
    for x in 0..n {
        for e in 0..table.len() {
            if rng.random_bool(density) {
                spec.trans.push((x, e, rng.random_range(0..n)));
            }
        }
    }
    spec.build(table)
}

/// Sub-automaton of `g` that drops some controllable moves and some marks.
fn sub_supervisor(rng: &mut ChaCha8Rng, g: &Automaton) -> Automaton {
    let mut spec = Spec::of(g);
    let table = g.events();
    spec.trans
        .retain(|&(_, e, _)| !table.is_controllable(e) || !rng.random_bool(0.3));
    for m in spec.marked.iter_mut() {
        if *m && rng.random_bool(0.2) {
            *m = false;
        }
    }
    spec.build(table)
}

/// A plant with up to 10 states and a supervisor with at most 12 states,
/// `L(S) ⊆ L(G)`, refusing only controllable events.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = random_table(&mut rng);
    let n = rng.random_range(2..=10);
    let g = random_automaton(&mut rng, &table, "q", n, 0.55);
    let mut s = None;
    if rng.random_bool(0.25) {
        let size = rng.random_range(1..=3);
        let req = random_automaton(&mut rng, &table, "r", size, 0.8);
        if let Ok(sup) = synthesize_monolithic(std::slice::from_ref(&g), &[req]) {
            if sup.num_states() <= 12 {
                s = Some(sup);
            }
        }
    }
    let s = s.unwrap_or_else(|| sub_supervisor(&mut rng, &g));
    let agents = AgentSpec::from_table(&table);
    Instance { g, s, agents }
}

/// An edited copy of a sub-automaton instance: the plant gains states and
/// loses moves, and the supervisor keeps most of its old choices.
pub fn random_variant(seed: u64, base: &Instance) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed0fed17);
    let table = base.g.events().clone();
    let mut gs = Spec::of(&base.g);
    let old = gs.states.len();
    for i in 0..rng.random_range(0..=2) {
        gs.states.push(format!("n{i}"));
        gs.marked.push(rng.random_bool(0.4));
    }
    let n = gs.states.len();
    gs.trans.retain(|_| !rng.random_bool(0.1));
    for x in old..n {
        let src = rng.random_range(0..x);
        let free: Vec<EventId> = (0..table.len())
            .filter(|&e| !gs.trans.iter().any(|&(y, f, _)| y == src && f == e))
            .collect();
        if let Some(&e) = free.choose(&mut rng) {
            gs.trans.push((src, e, x));
        }
        for e in 0..table.len() {
            if rng.random_bool(0.5) {
                gs.trans.push((x, e, rng.random_range(0..n)));
            }
        }
    }
    let g = gs.build(&table);

    let s_moves: HashSet<(String, EventId, String)> = (0..base.s.num_states())
        .flat_map(|x| {
            base.s
                .transitions(x)
                .iter()
                .map(move |&(e, t)| (base.s.state_name(x).to_owned(), e, base.s.state_name(t).to_owned()))
        })
        .collect();
    let mut ss = Spec::of(&g);
    ss.trans.retain(|&(x, e, t)| {
        if !table.is_controllable(e) {
            return true;
        }
        let key = (ss_name(&g, x), e, ss_name(&g, t));
        if base.s.state_index(&key.0).is_some() && !rng.random_bool(0.1) {
            s_moves.contains(&key)
        } else {
            !rng.random_bool(0.3)
        }
    });
    for (x, m) in ss.marked.iter_mut().enumerate() {
        if let Some(bx) = base.s.state_index(g.state_name(x)) {
            *m = *m && base.s.is_marked(bx);
        }
    }
    let s = ss.build(&table);
    Instance {
        g,
        s,
        agents: base.agents.clone(),
    }
}

fn ss_name(a: &Automaton, x: StateId) -> String {
    a.state_name(x).to_owned()
}

// ---------------------------------------------------------------------------
// Oracles

/// Control data of a supervisor recomputed from scratch: every pair reached
/// by strings of length up to `|S|·|G|`, explored level by level.
pub struct OracleContext {
    pub enabled: Vec<BTreeSet<EventId>>,
    /// Controllable events some plant state paired with `x` offers but `x` refuses.
    pub refused: Vec<BTreeSet<EventId>>,
    pub marked: Vec<bool>,
    pub plant_marked: Vec<bool>,
}

pub fn oracle_context(g: &Automaton, s: &Automaton) -> OracleContext {
    let n = s.num_states();
    let table = s.events();
    let mut reached: HashSet<(StateId, StateId)> = HashSet::new();
    let mut level: HashSet<(StateId, StateId)> = HashSet::from([(s.initial(), g.initial())]);
    for _ in 0..=n * g.num_states() {
        reached.extend(level.iter().copied());
        let mut next = HashSet::new();
        for &(x, q) in &level {
            for e in 0..table.len() {
                if let (Some(x2), Some(q2)) = (s.next(x, e), g.next(q, e)) {
                    next.insert((x2, q2));
                }
            }
        }
        level = next;
    }
    let mut refused = vec![BTreeSet::new(); n];
    let mut plant_marked = vec![false; n];
    for &(x, q) in &reached {
        plant_marked[x] |= g.is_marked(q);
        for e in 0..table.len() {
            if table.is_controllable(e) && g.next(q, e).is_some() && s.next(x, e).is_none() {
                refused[x].insert(e);
            }
        }
    }
    OracleContext {
        enabled: (0..n)
            .map(|x| s.transitions(x).iter().map(|&(e, _)| e).collect())
            .collect(),
        refused,
        marked: (0..n).map(|x| s.is_marked(x)).collect(),
        plant_marked,
    }
}

impl OracleContext {
    pub fn disabled(&self, agent: &AgentSpec, x: StateId) -> BTreeSet<EventId> {
        self.refused[x]
            .iter()
            .copied()
            .filter(|&e| agent.controllable.contains(e))
            .collect()
    }

    pub fn consistent(&self, agent: &AgentSpec, x: StateId, y: StateId) -> bool {
        self.enabled[x].is_disjoint(&self.disabled(agent, y))
            && self.enabled[y].is_disjoint(&self.disabled(agent, x))
            && (self.plant_marked[x] != self.plant_marked[y] || self.marked[x] == self.marked[y])
    }

    /// Both cover conditions checked pair by pair.
    pub fn is_congruence(&self, s: &Automaton, agent: &AgentSpec, cover: &Cover) -> bool {
        let n = s.num_states();
        for x in 0..n {
            for y in 0..n {
                if !cover.same_cell(x, y) {
                    continue;
                }
                if !self.consistent(agent, x, y) {
                    return false;
                }
                for e in 0..s.events().len() {
                    if let (Some(a), Some(b)) = (s.next(x, e), s.next(y, e)) {
                        if !cover.same_cell(a, b) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// No union of two cells is again a congruence.
    pub fn is_maximally_reduced(&self, s: &Automaton, agent: &AgentSpec, cover: &Cover) -> bool {
        let ids: Vec<usize> = cover.cell_ids().to_vec();
        let mut distinct = ids.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for (a, &ca) in distinct.iter().enumerate() {
            for &cb in &distinct[a + 1..] {
                let merged = Cover::from_cell_ids(
                    ids.iter().map(|&c| if c == cb { ca } else { c }).collect(),
                );
                if self.is_congruence(s, agent, &merged) {
                    return false;
                }
            }
        }
        true
    }
}

/// Every string over the alphabet up to `depth` events long.
pub fn all_traces(num_events: usize, depth: usize) -> Vec<Vec<EventId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &frontier {
            for e in 0..num_events {
                let mut u: Vec<EventId> = t.clone();
                u.push(e);
                next.push(u);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// (in closed language, in marked language) of a set of automata running jointly.
pub fn joint_membership(parts: &[&Automaton], trace: &[EventId]) -> (bool, bool) {
    let mut marked = true;
    for a in parts {
        match a.run(trace) {
            None => return (false, false),
            Some(x) => marked &= a.is_marked(x),
        }
    }
    (true, marked)
}

/// First string (in length-lexicographic order) up to `depth` on which the
/// two sides of control equivalence differ, pruned where both reject.
pub fn trace_discrepancy(
    g: &Automaton,
    s: &Automaton,
    locs: &[&Automaton],
    depth: usize,
) -> Option<Vec<EventId>> {
    let mut lhs: Vec<&Automaton> = vec![g];
    lhs.extend_from_slice(locs);
    let rhs = [s, g];
    let ne = g.events().len();
    let mut frontier: Vec<Vec<EventId>> = vec![Vec::new()];
    for d in 0..=depth {
        let mut next = Vec::new();
        for t in &frontier {
            let a = joint_membership(&lhs, t);
            let b = joint_membership(&rhs, t);
            if a != b {
                return Some(t.clone());
            }
            if d < depth && a.0 {
                for e in 0..ne {
                    let mut u = t.clone();
                    u.push(e);
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
    None
}

/// Number of states reachable from the initial state, by repeated relaxation.
pub fn reachable_count(a: &Automaton) -> usize {
    let mut reach = vec![false; a.num_states()];
    reach[a.initial()] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for x in 0..a.num_states() {
            if reach[x] {
                for &(_, t) in a.transitions(x) {
                    if !reach[t] {
                        reach[t] = true;
                        changed = true;
                    }
                }
            }
        }
    }
    reach.iter().filter(|&&r| r).count()
}

/// Cell membership by state names, for comparing covers across orders.
pub fn named_cells(s: &Automaton, cover: &Cover) -> BTreeSet<BTreeSet<String>> {
    let mut by_cell: HashMap<usize, BTreeSet<String>> = HashMap::new();
    for x in 0..s.num_states() {
        by_cell
            .entry(cover.cell_of(x))
            .or_default()
            .insert(s.state_name(x).to_owned());
    }
    by_cell.into_values().collect()
}
