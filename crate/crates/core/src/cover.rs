//! Partitions of supervisor states into cells, and their text form.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automaton::{Automaton, StateId};
use crate::error::{Error, Result};

/// A partition of supervisor states: every state carries one cell id.
///
/// Cell ids are arbitrary integers; [`Cover::normalized`] renumbers them
/// by ascending minimum member.
#[derive(Debug, Clone)]
pub struct Cover {
    cell_of: Vec<usize>,
}

/// Two covers are equal when they induce the same partition, whatever
/// their cell ids.
impl PartialEq for Cover {
    fn eq(&self, other: &Self) -> bool {
        self.normalized().cell_of == other.normalized().cell_of
    }
}

impl Eq for Cover {}

impl Cover {
    pub fn from_cell_ids(cell_of: Vec<usize>) -> Self {
        Self { cell_of }
    }

    pub fn singleton(n: usize) -> Self {
        Self {
            cell_of: (0..n).collect(),
        }
    }

    /// Builds a cover from explicit cells; every state in `0..n` must occur exactly once.
    pub fn from_cells(n: usize, cells: &[Vec<StateId>]) -> Result<Self> {
        let mut cell_of = vec![usize::MAX; n];
        for (c, members) in cells.iter().enumerate() {
            for &x in members {
                if x >= n {
                    return Err(Error::InvalidCover(format!("state {x} out of range")));
                }
                if cell_of[x] != usize::MAX {
                    return Err(Error::InvalidCover(format!("state {x} in two cells")));
                }
                cell_of[x] = c;
            }
        }
        if let Some(x) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidCover(format!("state {x} in no cell")));
        }
        Ok(Self { cell_of })
    }

    pub fn num_states(&self) -> usize {
        self.cell_of.len()
    }

    pub fn cell_of(&self, x: StateId) -> usize {
        self.cell_of[x]
    }

    pub fn cell_ids(&self) -> &[usize] {
        &self.cell_of
    }

    pub fn same_cell(&self, x: StateId, y: StateId) -> bool {
        self.cell_of[x] == self.cell_of[y]
    }

    /// Cells sorted by minimum member; members ascending.
    pub fn cells(&self) -> Vec<Vec<StateId>> {
        let mut slot: HashMap<usize, usize> = HashMap::new();
        let mut cells: Vec<Vec<StateId>> = Vec::new();
        for (x, &c) in self.cell_of.iter().enumerate() {
            let s = *slot.entry(c).or_insert_with(|| {
                cells.push(Vec::new());
                cells.len() - 1
            });
            cells[s].push(x);
        }
        cells
    }

    pub fn num_cells(&self) -> usize {
        let mut ids = self.cell_of.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Same partition with cell ids `0..num_cells` in order of minimum member.
    pub fn normalized(&self) -> Cover {
        let mut slot: HashMap<usize, usize> = HashMap::new();
        let cell_of = self
            .cell_of
            .iter()
            .map(|&c| {
                let next = slot.len();
                *slot.entry(c).or_insert(next)
            })
            .collect();
        Cover { cell_of }
    }

    /// Whether every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Cover) -> bool {
        let mut image: HashMap<usize, usize> = HashMap::new();
        self.cell_of
            .iter()
            .zip(&coarser.cell_of)
            .all(|(&c, &d)| *image.entry(c).or_insert(d) == d)
    }

    /// Serializes as `cell <id>: <state> ...`, one line per cell, using the
    /// normalized ids and the state names of `s`.
    pub fn to_text(&self, s: &Automaton) -> String {
        let mut out = String::new();
        for (id, cell) in self.cells().iter().enumerate() {
            let _ = write!(out, "cell {id}:");
            for &x in cell {
                let _ = write!(out, " {}", s.state_name(x));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the `cell <id>: ...` format against the state names of `s`.
    pub fn parse(text: &str, s: &Automaton) -> Result<Cover> {
        let mut cell_of = vec![usize::MAX; s.num_states()];
        let mut seen_ids = HashMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line, message };
            let rest = content
                .strip_prefix("cell")
                .ok_or_else(|| perr("expected `cell <id>: ...`".into()))?;
            let (id, members) = rest
                .split_once(':')
                .ok_or_else(|| perr("missing `:` after cell id".into()))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| perr(format!("invalid cell id `{}`", id.trim())))?;
            if seen_ids.insert(id, line).is_some() {
                return Err(perr(format!("duplicate cell id {id}")));
            }
            for name in members.split_whitespace() {
                let x = s
                    .state_index(name)
                    .ok_or_else(|| perr(format!("unknown state `{name}`")))?;
                if cell_of[x] != usize::MAX {
                    return Err(perr(format!("state `{name}` already in a cell")));
                }
                cell_of[x] = id;
            }
        }
        if let Some(x) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidCover(format!(
                "state `{}` is in no cell",
                s.state_name(x)
            )));
        }
        Ok(Cover { cell_of })
    }
}
