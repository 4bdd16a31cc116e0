//! Monolithic supervisor synthesis (supremal controllable and nonblocking
//! sublanguage) over a shared alphabet.
//!
//! Requirements restrict behavior by language: where a requirement
//! automaton has no transition on an event, the event is prohibited. A
//! prohibited controllable event is simply disabled; a prohibited
//! uncontrollable event that the plant enables makes the state bad.

use std::collections::{HashMap, VecDeque};

use crate::automaton::{Automaton, EventId, StateId};
use crate::error::{Error, Result};

/// Synthesizes the maximally permissive, controllable and nonblocking
/// supervisor for the plants under the requirements.
///
/// Supervisor states are named `<plant part>` or `<plant part>|<requirement part>`,
/// each part joining component state names with `.`.
pub fn synthesize_monolithic(plants: &[Automaton], requirements: &[Automaton]) -> Result<Automaton> {
    let first = plants
        .first()
        .ok_or_else(|| Error::InvalidConfig("synthesis needs at least one plant".into()))?;
    if plants
        .iter()
        .chain(requirements)
        .any(|a| !a.shares_alphabet(first))
    {
        return Err(Error::AlphabetMismatch);
    }
    let events = first.events().clone();
    let components: Vec<&Automaton> = plants.iter().chain(requirements).collect();
    let np = plants.len();

    // Reachable product of plants and requirements.
    let init: Vec<StateId> = components.iter().map(|c| c.initial()).collect();
    let mut ids: HashMap<Vec<StateId>, usize> = HashMap::from([(init.clone(), 0)]);
    let mut tuples = vec![init];
    let mut trans: Vec<Vec<(EventId, usize)>> = Vec::new();
    let mut bad: Vec<bool> = Vec::new();
    let mut cursor = 0;
    while cursor < tuples.len() {
        let tuple = tuples[cursor].clone();
        let mut out = Vec::new();
        let mut is_bad = false;
        'events: for &(e, t0) in plants[0].transitions(tuple[0]) {
            let mut target = Vec::with_capacity(tuple.len());
            target.push(t0);
            for (c, &x) in components.iter().zip(&tuple).skip(1).take(np - 1) {
                match c.next(x, e) {
                    Some(t) => target.push(t),
                    None => continue 'events,
                }
            }
            for (c, &x) in components.iter().zip(&tuple).skip(np) {
                match c.next(x, e) {
                    Some(t) => target.push(t),
                    None => {
                        if !events.is_controllable(e) {
                            is_bad = true;
                        }
                        continue 'events;
                    }
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
        bad.push(is_bad);
        cursor += 1;
    }
    let n = tuples.len();
    let marked: Vec<bool> = tuples
        .iter()
        .map(|t| components.iter().zip(t).all(|(c, &x)| c.is_marked(x)))
        .collect();

    let mut pred: Vec<Vec<(EventId, usize)>> = vec![Vec::new(); n];
    for (x, out) in trans.iter().enumerate() {
        for &(e, t) in out {
            pred[t].push((e, x));
        }
    }

    let mut good: Vec<bool> = bad.iter().map(|b| !b).collect();
    loop {
        let mut changed = false;

        // Controllability: an uncontrollable step into a removed state
        // removes its source, transitively.
        let mut queue: VecDeque<usize> = (0..n).filter(|&x| !good[x]).collect();
        while let Some(t) = queue.pop_front() {
            for &(e, x) in &pred[t] {
                if good[x] && !events.is_controllable(e) {
                    good[x] = false;
                    changed = true;
                    queue.push_back(x);
                }
            }
        }

        // Nonblocking: keep only states that reach a marked state inside the good set.
        let mut coreach = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&x| good[x] && marked[x]).collect();
        for &x in &queue {
            coreach[x] = true;
        }
        while let Some(t) = queue.pop_front() {
            for &(_, x) in &pred[t] {
                if good[x] && !coreach[x] {
                    coreach[x] = true;
                    queue.push_back(x);
                }
            }
        }
        for x in 0..n {
            if good[x] && !coreach[x] {
                good[x] = false;
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }
    if !good[0] {
        return Err(Error::EmptySupervisor);
    }

    // Reachable part of the good states, in breadth-first order.
    let mut new_id = vec![usize::MAX; n];
    let mut order = vec![0];
    new_id[0] = 0;
    let mut cursor = 0;
    while cursor < order.len() {
        let x = order[cursor];
        for &(_, t) in &trans[x] {
            if good[t] && new_id[t] == usize::MAX {
                new_id[t] = order.len();
                order.push(t);
            }
        }
        cursor += 1;
    }

    let mut b = Automaton::builder(events);
    for &x in &order {
        let t = &tuples[x];
        let plant_part = join_names(&components[..np], &t[..np]);
        let name = if requirements.is_empty() {
            plant_part
        } else {
            format!("{plant_part}|{}", join_names(&components[np..], &t[np..]))
        };
        let id = b.add_state(name)?;
        b.set_marked(id, marked[x])?;
    }
    b.set_initial(0)?;
    for &x in &order {
        for &(e, t) in &trans[x] {
            if good[t] {
                b.add_transition(new_id[x], e, new_id[t])?;
            }
        }
    }
    b.build()
}

/// Renames synthesized states to their plant part, e.g. `c1@L1R1.m1@L4R5`,
/// so that a plant configuration keeps its name across model edits. Fails
/// if two states share a plant part.
pub fn plant_state_names(sup: &Automaton) -> Result<Automaton> {
    sup.renamed(|_, name| name.split('|').next().unwrap_or(name).to_owned())
}

fn join_names(components: &[&Automaton], states: &[StateId]) -> String {
    components
        .iter()
        .zip(states)
        .map(|(c, &x)| c.state_name(x))
        .collect::<Vec<_>>()
        .join(".")
}
