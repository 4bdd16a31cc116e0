//! Line-based text format for automata.
//!
//! ```text
//! [EVENTS]
//! <name> <c|u> <agent>
//! [STATES]
//! <name> [initial] [marked]
//! [TRANS]
//! <src> <event> <dst>
//! ```
//!
//! `#` starts a comment. Sections appear in this order, exactly one state
//! is `initial`, and a `(src, event)` pair may occur once.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::automaton::{Automaton, EventDecl, EventTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    None,
    Events,
    States,
    Trans,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses an automaton together with the event table declared in the file.
pub fn parse_automaton(text: &str) -> Result<Automaton> {
    parse(text, None)
}

/// Parses an automaton whose `[EVENTS]` section must equal `events`; the
/// returned automaton shares the given table handle.
pub fn parse_automaton_with(text: &str, events: &Arc<EventTable>) -> Result<Automaton> {
    parse(text, Some(events))
}

fn parse(text: &str, shared: Option<&Arc<EventTable>>) -> Result<Automaton> {
    let mut section = Section::None;
    let mut decls = Vec::new();
    let mut builder = None;
    let mut initial_line = None;

    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            let next = match content {
                "[EVENTS]" => Section::Events,
                "[STATES]" => Section::States,
                "[TRANS]" => Section::Trans,
                other => return Err(err(line, format!("unknown section {other}"))),
            };
            if next <= section {
                return Err(err(line, format!("section {content} out of order")));
            }
            if next >= Section::States && builder.is_none() {
                let table = EventTable::new(std::mem::take(&mut decls))
                    .map_err(|e| err(line, e.to_string()))?;
                let table = match shared {
                    Some(s) if **s == table => s.clone(),
                    Some(_) => return Err(Error::AlphabetMismatch),
                    None => Arc::new(table),
                };
                builder = Some(Automaton::builder(table));
            }
            if next == Section::Trans && initial_line.is_none() {
                return Err(err(line, "no state is marked `initial`"));
            }
            section = next;
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => return Err(err(line, "content before [EVENTS]")),
            Section::Events => {
                let [name, kind, agent] = fields[..] else {
                    return Err(err(line, "expected `<name> <c|u> <agent>`"));
                };
                let controllable = match kind {
                    "c" => true,
                    "u" => false,
                    _ => return Err(err(line, format!("expected `c` or `u`, found `{kind}`"))),
                };
                let agent: usize = agent
                    .parse()
                    .map_err(|_| err(line, format!("invalid agent `{agent}`")))?;
                if decls.iter().any(|d: &EventDecl| d.name == name) {
                    return Err(err(line, format!("duplicate event name `{name}`")));
                }
                decls.push(EventDecl::new(name, controllable, agent));
            }
            Section::States => {
                let b = builder.as_mut().expect("builder exists after [STATES]");
                let (name, flags) = fields.split_first().expect("non-empty line");
                if b.state_index(name).is_some() {
                    return Err(err(line, format!("duplicate state name `{name}`")));
                }
                let x = b.add_state(*name).map_err(|e| err(line, e.to_string()))?;
                for flag in flags {
                    match *flag {
                        "initial" => {
                            if let Some(prev) = initial_line {
                                return Err(err(
                                    line,
                                    format!("second initial state (first on line {prev})"),
                                ));
                            }
                            initial_line = Some(line);
                            b.set_initial(x)?;
                        }
                        "marked" => b.set_marked(x, true)?,
                        other => return Err(err(line, format!("unknown state flag `{other}`"))),
                    }
                }
            }
            Section::Trans => {
                let b = builder.as_mut().expect("builder exists after [STATES]");
                let [src, event, dst] = fields[..] else {
                    return Err(err(line, "expected `<src> <event> <dst>`"));
                };
                let s = b
                    .state_index(src)
                    .ok_or_else(|| err(line, format!("undeclared state `{src}`")))?;
                let t = b
                    .state_index(dst)
                    .ok_or_else(|| err(line, format!("undeclared state `{dst}`")))?;
                let e = b
                    .events()
                    .lookup(event)
                    .ok_or_else(|| err(line, format!("undeclared event `{event}`")))?;
                b.add_transition(s, e, t).map_err(|e| match e {
                    Error::Nondeterministic { .. } => err(
                        line,
                        format!("duplicate transition from `{src}` on `{event}`"),
                    ),
                    other => other,
                })?;
            }
        }
    }

    let b = builder.ok_or_else(|| err(0, "missing [STATES] section"))?;
    if initial_line.is_none() {
        return Err(err(0, "no state is marked `initial`"));
    }
    b.build()
}

/// Serializes `a`. The output is deterministic: events and states in index
/// order, transitions grouped by source state in event order.
pub fn write_automaton(a: &Automaton) -> String {
    let mut out = String::new();
    let ev = a.events();
    out.push_str("[EVENTS]\n");
    for d in ev.decls() {
        let kind = if d.controllable { 'c' } else { 'u' };
        let _ = writeln!(out, "{} {} {}", d.name, kind, d.agent);
    }
    out.push_str("[STATES]\n");
    for (x, name) in a.states().iter().enumerate() {
        out.push_str(name);
        if x == a.initial() {
            out.push_str(" initial");
        }
        if a.is_marked(x) {
            out.push_str(" marked");
        }
        out.push('\n');
    }
    out.push_str("[TRANS]\n");
    for x in 0..a.num_states() {
        for &(e, t) in a.transitions(x) {
            let _ = writeln!(out, "{} {} {}", a.state_name(x), ev.name(e), a.state_name(t));
        }
    }
    out
}
