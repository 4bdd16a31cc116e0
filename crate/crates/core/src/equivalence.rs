//! Control equivalence between a monolithic supervisor and a set of local
//! supervisors, relative to a plant:
//!
//! ```text
//! L(G)  ∩ ⋂ L(LOC_k)  = L(S)  ∩ L(G)
//! Lm(G) ∩ ⋂ Lm(LOC_k) = Lm(S) ∩ Lm(G)
//! ```
//!
//! All automata are deterministic, so both sides are compared by a joint
//! breadth-first traversal of the two reachable products.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::automaton::{reachable_trim, sync_product, Automaton, EventId, StateId};
use crate::error::{Error, Result};

type Pair = (StateId, StateId);

/// Which language equality failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Closed behavior.
    Language,
    /// Marked behavior.
    MarkedLanguage,
}

/// Direction of the failed inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The local supervisors permit (or mark) a string the monolithic one does not.
    LocalExceeds,
    /// The local supervisors forbid (or leave unmarked) a string the monolithic one permits.
    LocalFallsShort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Event names; for a language failure the last event is the one enabled on one side only.
    pub trace: Vec<String>,
    pub condition: Condition,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    pub counterexample: Option<Counterexample>,
}

impl fmt::Display for EquivalenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "EQUIVALENT"),
            Some(c) => {
                let what = match (c.condition, c.direction) {
                    (Condition::Language, Direction::LocalExceeds) => {
                        "local supervisors permit a string the supervisor forbids"
                    }
                    (Condition::Language, Direction::LocalFallsShort) => {
                        "local supervisors forbid a string the supervisor permits"
                    }
                    (Condition::MarkedLanguage, Direction::LocalExceeds) => {
                        "local supervisors mark a string the supervisor does not"
                    }
                    (Condition::MarkedLanguage, Direction::LocalFallsShort) => {
                        "local supervisors do not mark a string the supervisor marks"
                    }
                };
                write!(f, "NOT EQUIVALENT: {what}\ntrace: {}", c.trace.join(" "))
            }
        }
    }
}

/// The plant under joint control of the given local supervisors: reachable
/// product of `g` with every supervisor, marking by conjunction.
pub fn controlled_behavior(g: &Automaton, locs: &[&Automaton]) -> Result<Automaton> {
    if locs.is_empty() {
        return Ok(reachable_trim(g));
    }
    let mut parts = Vec::with_capacity(locs.len() + 1);
    parts.push(g);
    parts.extend_from_slice(locs);
    sync_product(&parts)
}

/// Checks control equivalence of `locs` to `s` with respect to `g`.
pub fn check_control_equivalence(
    g: &Automaton,
    s: &Automaton,
    locs: &[&Automaton],
) -> Result<EquivalenceVerdict> {
    if !g.shares_alphabet(s) || locs.iter().any(|l| !l.shares_alphabet(g)) {
        return Err(Error::AlphabetMismatch);
    }
    let a = controlled_behavior(g, locs)?;
    let b = sync_product(&[s, g])?;

    let start = (a.initial(), b.initial());
    let mut parent: HashMap<Pair, Option<(Pair, EventId)>> = HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    let found = 'search: loop {
        let Some((x, y)) = queue.pop_front() else {
            break None;
        };
        let (ta, tb) = (a.transitions(x), b.transitions(y));
        let (mut i, mut j) = (0, 0);
        while i < ta.len() || j < tb.len() {
            let ea = ta.get(i).map_or(usize::MAX, |t| t.0);
            let eb = tb.get(j).map_or(usize::MAX, |t| t.0);
            if ea < eb {
                break 'search Some(((x, y), Some(ea), Condition::Language, Direction::LocalExceeds));
            }
            if eb < ea {
                break 'search Some(((x, y), Some(eb), Condition::Language, Direction::LocalFallsShort));
            }
            let next = (ta[i].1, tb[j].1);
            if let Entry::Vacant(v) = parent.entry(next) {
                v.insert(Some(((x, y), ea)));
                queue.push_back(next);
            }
            i += 1;
            j += 1;
        }
        if a.is_marked(x) != b.is_marked(y) {
            let dir = if a.is_marked(x) {
                Direction::LocalExceeds
            } else {
                Direction::LocalFallsShort
            };
            break Some(((x, y), None, Condition::MarkedLanguage, dir));
        }
    };

    Ok(match found {
        None => EquivalenceVerdict {
            equivalent: true,
            counterexample: None,
        },
        Some((pair, last, condition, direction)) => {
            let mut events = Vec::new();
            let mut cur = pair;
            while let Some(Some((prev, e))) = parent.get(&cur) {
                events.push(*e);
                cur = *prev;
            }
            events.reverse();
            events.extend(last);
            let table = g.events();
            EquivalenceVerdict {
                equivalent: false,
                counterexample: Some(Counterexample {
                    trace: events.iter().map(|&e| table.name(e).to_owned()).collect(),
                    condition,
                    direction,
                }),
            }
        }
    })
}
